//! Side-by-side timing of the timer tree and the naive baseline on the same
//! operation sequence.

use std::time::{Duration, Instant};

use crate::baseline::NaiveBst;
use crate::fraction::RebalanceFraction;
use crate::tree::TimerTree;
use crate::validation::height_bound;
use crate::workload::{OpKind, Workload};

#[derive(Clone, Copy, Debug)]
pub struct BenchSide {
    pub final_size: usize,
    pub final_height: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug)]
pub struct BenchReport {
    pub k: RebalanceFraction,
    pub timer_tree: BenchSide,
    /// 0 for an empty final tree.
    pub height_bound: u64,
    pub naive: Option<BenchSide>,
}

pub fn bench(workload: &Workload, k: RebalanceFraction, with_naive: bool) -> BenchReport {
    let mut tree = TimerTree::new(k);
    let start = Instant::now();
    for op in &workload.ops {
        match op.kind {
            OpKind::Insert => {
                tree.insert(op.key);
            }
            OpKind::Delete => {
                tree.delete(&op.key);
            }
            OpKind::Contains => {
                std::hint::black_box(tree.contains(&op.key));
            }
        }
    }
    let timer_tree = BenchSide {
        elapsed: start.elapsed(),
        final_size: tree.len(),
        final_height: tree.height(),
    };

    let naive = with_naive.then(|| {
        let mut bst = NaiveBst::new();
        let start = Instant::now();
        for op in &workload.ops {
            match op.kind {
                OpKind::Insert => {
                    bst.insert(op.key);
                }
                OpKind::Delete => {
                    bst.delete(&op.key);
                }
                OpKind::Contains => {
                    std::hint::black_box(bst.contains(&op.key));
                }
            }
        }
        BenchSide {
            elapsed: start.elapsed(),
            final_size: bst.len(),
            final_height: bst.height(),
        }
    });

    BenchReport {
        k,
        timer_tree,
        height_bound: if tree.is_empty() {
            0
        } else {
            height_bound(tree.len() as u64, k)
        },
        naive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::{gen, WorkloadKind};

    #[test]
    fn both_sides_agree_on_size() {
        let w = gen(WorkloadKind::RandomMixed { p_delete: 0.4 }, 2000, 1);
        let report = bench(&w, RebalanceFraction::HALF, true);
        let naive = report.naive.unwrap();
        assert_eq!(naive.final_size, report.timer_tree.final_size);
        assert!(report.timer_tree.final_height as u64 <= report.height_bound);
    }

    #[test]
    fn naive_is_optional() {
        let w = gen(WorkloadKind::Ascending, 10, 0);
        assert!(bench(&w, RebalanceFraction::HALF, false).naive.is_none());
    }
}
