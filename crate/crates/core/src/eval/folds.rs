use std::collections::HashSet;
use std::hash::Hash;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SubjectId;
use crate::rng;

pub const GROUPS_PER_SUBJECT: usize = 6;
pub const GROUP_SIZE: usize = 102;
/// 510 / 9 rounded down.
pub const TRAIN_PER_IMPOSTER: usize = 56;
/// 102 / 9 rounded down.
pub const TEST_PER_IMPOSTER: usize = 11;

/// One instance of one subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowRef {
    pub subject: usize,
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub subject: SubjectId,
    pub subject_index: usize,
    pub held_out_group: usize,
    pub train: Vec<RowRef>,
    pub test: Vec<RowRef>,
}

impl FoldPlan {
    pub fn is_valid(&self, r: RowRef) -> bool {
        r.subject == self.subject_index
    }

    pub fn train_labels(&self) -> Vec<bool> {
        self.train.iter().map(|&r| self.is_valid(r)).collect()
    }

    pub fn test_labels(&self) -> Vec<bool> {
        self.test.iter().map(|&r| self.is_valid(r)).collect()
    }
}

/// Leave-one-group-out folds for every subject.
///
/// `groups[s][i]` is the group of instance `i` of subject `s`. Each subject
/// in turn is the valid user and every other subject an imposter. The
/// valid user's held-out group is the test set and the rest is training;
/// imposter rows are drawn uniformly without replacement, the training
/// share from the imposter's other groups and the test share from its
/// group with the same index, so that no imposter event contributes to both
/// sides.
pub fn plan_folds(subjects: &[SubjectId], groups: &[Vec<usize>], seed: u64) -> Result<Vec<FoldPlan>> {
    if subjects.len() != groups.len() {
        return Err(Error::arg("subject and group lists differ in length"));
    }
    if subjects.len() < 2 {
        return Err(Error::data("fold planning needs at least two subjects"));
    }
    let n_groups = group_count(&groups[0])?;
    for (s, g) in subjects.iter().zip(groups) {
        if group_count(g)? != n_groups {
            return Err(Error::data(format!("subject {s} has a different number of groups")));
        }
    }
    let imposters = subjects.len() - 1;
    let mut plans = Vec::with_capacity(subjects.len() * n_groups);
    for (s, subject) in subjects.iter().enumerate() {
        let own = &groups[s];
        for h in 0..n_groups {
            let mut train: Vec<RowRef> = Vec::new();
            let mut test: Vec<RowRef> = Vec::new();
            for (row, &g) in own.iter().enumerate() {
                let r = RowRef { subject: s, row };
                if g == h {
                    test.push(r);
                } else {
                    train.push(r);
                }
            }
            let n_train = train.len() / imposters;
            let n_test = test.len() / imposters;
            let mut rng = rng::stream(seed, "fold", (s * n_groups + h) as u64);
            for (o, other) in groups.iter().enumerate().filter(|&(o, _)| o != s) {
                let (held, rest): (Vec<usize>, Vec<usize>) = (0..other.len()).partition(|&i| other[i] == h);
                for (pool, want, out) in [(&rest, n_train, &mut train), (&held, n_test, &mut test)] {
                    if pool.len() < want {
                        return Err(Error::data(format!(
                            "imposter {} has {} rows for a draw of {want}",
                            subjects[o],
                            pool.len()
                        )));
                    }
                    let mut picked: Vec<usize> = sample(&mut rng, pool.len(), want).into_iter().map(|i| pool[i]).collect();
                    picked.sort_unstable();
                    out.extend(picked.into_iter().map(|row| RowRef { subject: o, row }));
                }
            }
            plans.push(FoldPlan {
                subject: subject.clone(),
                subject_index: s,
                held_out_group: h,
                train,
                test,
            });
        }
    }
    Ok(plans)
}

fn group_count(groups: &[usize]) -> Result<usize> {
    let n = groups.iter().max().map_or(0, |&m| m + 1);
    if n < 2 {
        return Err(Error::data("fold planning needs at least two groups per subject"));
    }
    for g in 0..n {
        if !groups.contains(&g) {
            return Err(Error::data(format!("group {g} is empty")));
        }
    }
    Ok(n)
}

/// Training rows that share an original event with some test row of the
/// same fold. `roots[s][i]` identifies the original event instance `i` of
/// subject `s` descends from.
pub fn leakage_count<K: Eq + Hash>(plans: &[FoldPlan], roots: &[Vec<K>]) -> usize {
    plans
        .iter()
        .map(|p| {
            let held: HashSet<(usize, &K)> = p.test.iter().map(|r| (r.subject, &roots[r.subject][r.row])).collect();
            p.train
                .iter()
                .filter(|r| held.contains(&(r.subject, &roots[r.subject][r.row])))
                .count()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize) -> (Vec<SubjectId>, Vec<Vec<usize>>) {
        let subjects = (0..n).map(|i| SubjectId::new(format!("s{i:02}")).unwrap()).collect();
        let groups = (0..n)
            .map(|_| (0..GROUPS_PER_SUBJECT * GROUP_SIZE).map(|i| i / GROUP_SIZE).collect())
            .collect();
        (subjects, groups)
    }

    #[test]
    fn ten_subjects_give_sixty_balanced_folds() {
        let (subjects, groups) = setup(10);
        let plans = plan_folds(&subjects, &groups, 1).unwrap();
        assert_eq!(plans.len(), 60);
        for p in &plans {
            let tl = p.train_labels();
            let el = p.test_labels();
            assert_eq!(tl.iter().filter(|&&v| v).count(), 510);
            assert_eq!(tl.iter().filter(|&&v| !v).count(), 9 * TRAIN_PER_IMPOSTER);
            assert_eq!(el.iter().filter(|&&v| v).count(), 102);
            assert_eq!(el.iter().filter(|&&v| !v).count(), 9 * TEST_PER_IMPOSTER);
            let train: HashSet<_> = p.train.iter().collect();
            assert!(p.test.iter().all(|r| !train.contains(r)));
        }
        assert_eq!(leakage_count(&plans, &groups), 0);
    }

    #[test]
    fn plans_are_seeded() {
        let (subjects, groups) = setup(3);
        let a = plan_folds(&subjects, &groups, 7).unwrap();
        assert_eq!(a, plan_folds(&subjects, &groups, 7).unwrap());
        assert_ne!(a, plan_folds(&subjects, &groups, 8).unwrap());
    }

    #[test]
    fn leakage_scan_sees_shared_roots() {
        let (subjects, groups) = setup(3);
        let plans = plan_folds(&subjects, &groups, 0).unwrap();
        let one_root: Vec<Vec<u8>> = groups.iter().map(|g| vec![0; g.len()]).collect();
        assert!(leakage_count(&plans, &one_root) > 0);
    }

    #[test]
    fn missing_group_structure_is_an_error() {
        let (subjects, mut groups) = setup(3);
        groups[1] = vec![0; 612];
        assert!(plan_folds(&subjects, &groups, 0).is_err());
        groups[1] = (0..612).map(|i| if i < 100 { 0 } else { 2 }).collect();
        assert!(plan_folds(&subjects, &groups, 0).is_err());
    }
}
