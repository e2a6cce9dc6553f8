use std::fmt;

use crate::error::{Error, Result};

use super::PointId;

/// One epoch's partition of the point ids `0..N` into `K` equal batches.
///
/// Construction only sorts the batches; use [`Assignment::validate`] or
/// [`Assignment::checked`] to enforce the partition invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    epoch: u64,
    batches: Vec<Vec<PointId>>,
}

impl Assignment {
    pub fn new(epoch: u64, mut batches: Vec<Vec<PointId>>) -> Self {
        for b in &mut batches {
            b.sort_unstable();
        }
        Assignment { epoch, batches }
    }

    /// Builds the assignment and rejects it unless it partitions `0..n_points`
    /// into equal batches.
    pub fn checked(epoch: u64, batches: Vec<Vec<PointId>>, n_points: usize) -> Result<Self> {
        let a = Assignment::new(epoch, batches);
        a.validate(n_points).into_result()?;
        Ok(a)
    }

    /// Worker `i` holds the ids `i*N/K .. (i+1)*N/K`.
    pub fn contiguous(n_points: usize, k_workers: usize, epoch: u64) -> Result<Self> {
        check_divisible(n_points, k_workers)?;
        let per = n_points / k_workers;
        let batches = (0..k_workers)
            .map(|i| (i * per..(i + 1) * per).map(|id| PointId(id as u32)).collect())
            .collect();
        Ok(Assignment { epoch, batches })
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn with_epoch(mut self, epoch: u64) -> Self {
        self.epoch = epoch;
        self
    }

    pub fn k_workers(&self) -> usize {
        self.batches.len()
    }

    /// Total number of ids across all batches.
    pub fn n_points(&self) -> usize {
        self.batches.iter().map(Vec::len).sum()
    }

    pub fn batches(&self) -> &[Vec<PointId>] {
        &self.batches
    }

    pub fn batch(&self, worker: usize) -> &[PointId] {
        &self.batches[worker]
    }

    /// `owners[id]` is the worker holding `id`. Only meaningful for a valid
    /// assignment over `n_points`.
    pub(crate) fn owners(&self, n_points: usize) -> Vec<usize> {
        let mut owners = vec![usize::MAX; n_points];
        for (w, batch) in self.batches.iter().enumerate() {
            for id in batch {
                owners[id.index()] = w;
            }
        }
        owners
    }

    pub fn validate(&self, n_points: usize) -> AssignmentReport {
        let k = self.k_workers();
        let mut report = AssignmentReport {
            n_points,
            k_workers: k,
            expected_batch_size: if k == 0 { 0 } else { n_points / k },
            violations: Vec::new(),
        };
        if k == 0 {
            report.violations.push(AssignmentViolation::NoWorkers);
            return report;
        }
        if n_points % k != 0 {
            report.violations.push(AssignmentViolation::NotDivisible { n_points, k_workers: k });
        }

        let mut seen = vec![false; n_points];
        for batch in &self.batches {
            for &id in batch {
                match seen.get_mut(id.index()) {
                    None => report.violations.push(AssignmentViolation::OutOfRange { id, n_points }),
                    Some(true) => report.violations.push(AssignmentViolation::Overlap { id }),
                    Some(flag) => *flag = true,
                }
            }
        }
        for (i, _) in seen.iter().enumerate().filter(|(_, s)| !**s) {
            report.violations.push(AssignmentViolation::Missing { id: PointId(i as u32) });
        }

        if n_points % k == 0 {
            for (worker, batch) in self.batches.iter().enumerate() {
                if batch.len() != report.expected_batch_size {
                    report.violations.push(AssignmentViolation::BatchSize {
                        worker,
                        size: batch.len(),
                        expected: report.expected_batch_size,
                    });
                }
            }
        }
        report
    }

    /// Reads the text format: one `w<index>: <id>,<id>,...` line per worker,
    /// 1-based indices, `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str, epoch: u64) -> Result<Self> {
        let mut rows: Vec<Option<Vec<PointId>>> = Vec::new();
        let mut last_line = 0;
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            last_line = line_no;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: line_no, message };

            let (head, ids) = line
                .split_once(':')
                .ok_or_else(|| parse_err(format!("expected `w<index>: ids`, found `{line}`")))?;
            let index: usize = head
                .trim()
                .strip_prefix('w')
                .and_then(|s| s.parse().ok())
                .filter(|&i| i >= 1)
                .ok_or_else(|| parse_err(format!("bad worker label `{}`", head.trim())))?;

            let mut batch = Vec::new();
            let ids = ids.trim();
            if !ids.is_empty() {
                for tok in ids.split(',') {
                    let tok = tok.trim();
                    let id: u32 = tok.parse().map_err(|_| parse_err(format!("bad point id `{tok}`")))?;
                    batch.push(PointId(id));
                }
            }

            if rows.len() < index {
                rows.resize(index, None);
            }
            if rows[index - 1].is_some() {
                return Err(parse_err(format!("worker w{index} listed twice")));
            }
            rows[index - 1] = Some(batch);
        }

        if rows.is_empty() {
            return Err(Error::Parse { line: last_line, message: "no worker lines".into() });
        }
        let batches = rows
            .into_iter()
            .enumerate()
            .map(|(i, b)| {
                b.ok_or_else(|| Error::Parse { line: last_line, message: format!("missing line for worker w{}", i + 1) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Assignment::new(epoch, batches))
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, batch) in self.batches.iter().enumerate() {
            let ids: Vec<String> = batch.iter().map(|id| id.to_string()).collect();
            writeln!(f, "w{}: {}", i + 1, ids.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn check_divisible(n_points: usize, k_workers: usize) -> Result<()> {
    if k_workers == 0 {
        return Err(Error::InvalidArgument("need at least one worker".into()));
    }
    if n_points == 0 || n_points % k_workers != 0 {
        return Err(Error::InvalidArgument(format!(
            "N={n_points} must be a positive multiple of K={k_workers}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssignmentViolation {
    NoWorkers,
    NotDivisible { n_points: usize, k_workers: usize },
    Overlap { id: PointId },
    OutOfRange { id: PointId, n_points: usize },
    Missing { id: PointId },
    BatchSize { worker: usize, size: usize, expected: usize },
}

impl fmt::Display for AssignmentViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignmentViolation::NoWorkers => write!(f, "no workers"),
            AssignmentViolation::NotDivisible { n_points, k_workers } => {
                write!(f, "N={n_points} is not divisible by K={k_workers}")
            }
            AssignmentViolation::Overlap { id } => write!(f, "disjointness: point {id} assigned more than once"),
            AssignmentViolation::OutOfRange { id, n_points } => {
                write!(f, "coverage: point {id} is outside 0..{n_points}")
            }
            AssignmentViolation::Missing { id } => write!(f, "coverage: point {id} is not assigned"),
            AssignmentViolation::BatchSize { worker, size, expected } => {
                write!(f, "equal size: w{} holds {size} points, expected {expected}", worker + 1)
            }
        }
    }
}

/// Outcome of checking an [`Assignment`] against `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentReport {
    pub n_points: usize,
    pub k_workers: usize,
    pub expected_batch_size: usize,
    pub violations: Vec<AssignmentViolation>,
}

impl AssignmentReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn disjoint(&self) -> bool {
        !self.violations.iter().any(|v| matches!(v, AssignmentViolation::Overlap { .. }))
    }

    pub fn covers(&self) -> bool {
        !self
            .violations
            .iter()
            .any(|v| matches!(v, AssignmentViolation::Missing { .. } | AssignmentViolation::OutOfRange { .. }))
    }

    pub fn equal_sizes(&self) -> bool {
        !self.violations.iter().any(|v| {
            matches!(
                v,
                AssignmentViolation::BatchSize { .. } | AssignmentViolation::NotDivisible { .. } | AssignmentViolation::NoWorkers
            )
        })
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidAssignment(v)),
        }
    }
}

/// Assignments of two consecutive epochs over the same points and workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShufflePair {
    prev: Assignment,
    next: Assignment,
}

impl ShufflePair {
    pub fn new(prev: Assignment, next: Assignment) -> Result<Self> {
        if prev.k_workers() != next.k_workers() {
            return Err(Error::InvalidArgument(format!(
                "worker count changes between epochs ({} vs {})",
                prev.k_workers(),
                next.k_workers()
            )));
        }
        let n = prev.n_points();
        if next.n_points() != n {
            return Err(Error::InvalidArgument(format!(
                "point count changes between epochs ({n} vs {})",
                next.n_points()
            )));
        }
        if next.epoch() != prev.epoch() + 1 {
            return Err(Error::InvalidArgument(format!(
                "epochs {} and {} are not consecutive",
                prev.epoch(),
                next.epoch()
            )));
        }
        prev.validate(n).into_result()?;
        next.validate(n).into_result()?;
        Ok(ShufflePair { prev, next })
    }

    pub fn prev(&self) -> &Assignment {
        &self.prev
    }

    pub fn next(&self) -> &Assignment {
        &self.next
    }

    pub fn k_workers(&self) -> usize {
        self.prev.k_workers()
    }

    pub fn n_points(&self) -> usize {
        self.prev.n_points()
    }

    pub fn batch_size(&self) -> usize {
        self.n_points() / self.k_workers()
    }

    /// Points that `worker` must receive: its next batch minus its current one.
    pub fn needed(&self, worker: usize) -> Vec<PointId> {
        let prev = self.prev.batch(worker);
        self.next.batch(worker).iter().copied().filter(|id| prev.binary_search(id).is_err()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<PointId> {
        v.iter().map(|&i| PointId(i)).collect()
    }

    #[test]
    fn valid_partition_passes() {
        let a = Assignment::new(0, vec![ids(&[0, 3, 6, 9, 12]), ids(&[1, 4, 7, 10, 13]), ids(&[2, 5, 8, 11, 14])]);
        let r = a.validate(15);
        assert!(r.is_ok(), "{:?}", r.violations);
        assert_eq!(r.expected_batch_size, 5);
    }

    #[test]
    fn overlap_is_reported() {
        let a = Assignment::new(0, vec![ids(&[0, 1]), ids(&[1, 2])]);
        let r = a.validate(4);
        assert!(!r.disjoint());
        assert!(r.violations.contains(&AssignmentViolation::Overlap { id: PointId(1) }));
        assert!(!r.covers());
    }

    #[test]
    fn unequal_batches_are_reported() {
        let a = Assignment::new(0, vec![ids(&[0, 1, 2, 3]), ids(&[4, 5, 6, 7, 8, 9])]);
        let r = a.validate(10);
        assert!(r.disjoint() && r.covers());
        assert!(!r.equal_sizes());
    }

    #[test]
    fn indivisible_n_is_structural_failure() {
        let a = Assignment::new(0, vec![ids(&[0, 1]), ids(&[2, 3, 4])]);
        let r = a.validate(5);
        assert!(r.violations.contains(&AssignmentViolation::NotDivisible { n_points: 5, k_workers: 2 }));
        assert!(Assignment::contiguous(5, 2, 0).is_err());
    }

    #[test]
    fn parse_text_format() {
        let text = "# epoch 0\n\nw2: 3,2\nw1: 0,1   # trailing comment\n";
        let a = Assignment::parse(text, 4).unwrap();
        assert_eq!(a.epoch(), 4);
        assert_eq!(a.batch(0), ids(&[0, 1]).as_slice());
        assert_eq!(a.batch(1), ids(&[2, 3]).as_slice());
        assert_eq!(a.to_text(), "w1: 0,1\nw2: 2,3\n");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match Assignment::parse("w1: 0,1\nw2: 2,x\n", 0) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(Assignment::parse("w1: 0\nw1: 1\n", 0), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Assignment::parse("w1: 0\nw3: 1\n", 0), Err(Error::Parse { .. })));
        assert!(matches!(Assignment::parse("v1: 0\n", 0), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Assignment::parse("# nothing\n", 0), Err(Error::Parse { .. })));
    }

    #[test]
    fn pair_rejects_mismatches() {
        let a = Assignment::contiguous(4, 2, 0).unwrap();
        assert!(ShufflePair::new(a.clone(), a.clone()).is_err());
        assert!(ShufflePair::new(a.clone(), Assignment::contiguous(4, 4, 1).unwrap()).is_err());
        assert!(ShufflePair::new(a.clone(), Assignment::contiguous(6, 2, 1).unwrap()).is_err());
        let pair = ShufflePair::new(a.clone(), a.with_epoch(1)).unwrap();
        assert!(pair.needed(0).is_empty());
    }
}
