use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Total length `T`, human prefix `H = ⌊T/3⌋` and generation budget `N = T − H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixcasePlan {
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "H")]
    pub h: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

impl MixcasePlan {
    pub fn from_total(t: usize) -> Self {
        let h = t / 3;
        MixcasePlan { t, h, n: t - h }
    }
}

/// Samples total lengths from the observed lengths clipped to their
/// inclusive nearest-rank 25th..75th percentile range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixcasePlanner {
    support: Vec<usize>,
    p25: usize,
    p75: usize,
}

impl MixcasePlanner {
    pub fn new(lengths: &[usize]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::value("lengths", "at least one length is required"));
        }
        if let Some(&short) = lengths.iter().find(|&&l| l < 3) {
            return Err(Error::value("lengths", format!("length {short} is below 3")));
        }
        let mut sorted = lengths.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let p25 = sorted[n.div_ceil(4) - 1];
        let p75 = sorted[(3 * n).div_ceil(4) - 1];
        let support: Vec<usize> = sorted.into_iter().filter(|l| (p25..=p75).contains(l)).collect();
        debug_assert!(!support.is_empty());
        Ok(MixcasePlanner { support, p25, p75 })
    }

    pub fn p25(&self) -> usize {
        self.p25
    }

    pub fn p75(&self) -> usize {
        self.p75
    }

    /// The clipped multiset, sorted ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MixcasePlan {
        MixcasePlan::from_total(self.support[rng.gen_range(0..self.support.len())])
    }

    /// Endless seeded stream of plans.
    pub fn plans(&self, seed: u64) -> impl Iterator<Item = MixcasePlan> + '_ {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        std::iter::repeat_with(move || self.sample(&mut rng))
    }
}

/// One plan drawn with `seed`.
pub fn mixcase_plan(lengths: &[usize], seed: u64) -> Result<MixcasePlan> {
    let planner = MixcasePlanner::new(lengths)?;
    Ok(planner.sample(&mut ChaCha8Rng::seed_from_u64(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    const LENGTHS: [usize; 5] = [10, 20, 30, 40, 50];

    #[test]
    fn nearest_rank_percentiles() {
        let p = MixcasePlanner::new(&LENGTHS).unwrap();
        assert_eq!((p.p25(), p.p75()), (20, 40));
        assert_eq!(p.support(), &[20, 30, 40]);
    }

    #[test]
    fn pinned_draw() {
        // Seed 1 draws the middle element of the clipped support.
        let plan = mixcase_plan(&LENGTHS, 1).unwrap();
        assert_eq!(plan, MixcasePlan { t: 30, h: 10, n: 20 });
    }

    #[test]
    fn constant_lengths() {
        for seed in 0..20 {
            assert_eq!(mixcase_plan(&[7; 4], seed).unwrap(), MixcasePlan { t: 7, h: 2, n: 5 });
        }
    }

    #[test]
    fn stream_covers_clipped_support() {
        let p = MixcasePlanner::new(&LENGTHS).unwrap();
        let seen: BTreeSet<usize> = p.plans(1).take(1000).map(|pl| pl.t).collect();
        assert_eq!(seen, BTreeSet::from([20, 30, 40]));
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(mixcase_plan(&[], 0).is_err());
        assert!(mixcase_plan(&[10, 2], 0).is_err());
    }

    #[test]
    fn json_keys() {
        let json = serde_json::to_string(&MixcasePlan::from_total(30)).unwrap();
        assert_eq!(json, r#"{"T":30,"H":10,"N":20}"#);
    }
}
