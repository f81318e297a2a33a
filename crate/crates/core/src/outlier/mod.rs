//! Block outlier tests and per-point screening baselines.
//!
//! A block test looks at the `t` most suspicious points together and either
//! declares the whole block outlying or accepts it. Rejection happens when
//! the statistic falls strictly below the tabulated critical value.

mod screen;
mod sw;
mod table;
mod tm;

use serde::{Deserialize, Serialize};

pub use screen::{box_plot_screen, mad_screen, quantile, DEFAULT_FENCE, DEFAULT_MAD_CUTOFF, MAD_CONSISTENCY};
pub use sw::{
    expected_normal_order_statistics, sw_coefficients, sw_statistic, sw_statistic_unsorted, SW_MAX_N, SW_MIN_N,
};
pub use table::{
    build_critical_table, Critical, CriticalValueTable, Provenance, TableSpec, TestKind, CACHE_HEADER,
    MIN_CONDITIONAL_SAMPLES,
};
pub use tm::{tm_lower_statistic, tm_residuals, tm_upper_statistic};

use crate::error::{Error, Result};

/// Where outliers are expected in the sorted data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Upper,
    Lower,
    Bidirectional,
}

/// Which block statistic to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockTest {
    /// Tietjen-Moore.
    Tm,
    /// Shapiro-Wilk.
    Sw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierVerdict {
    pub is_outlier_block: bool,
    pub statistic: f64,
    pub critical_value: f64,
    /// Sensor indices of the suspected block, most extreme first.
    pub suspected_indices: Vec<usize>,
    pub direction: Direction,
    pub t: usize,
}

impl OutlierVerdict {
    fn decide(statistic: f64, critical_value: f64, suspected_indices: Vec<usize>, direction: Direction) -> Self {
        Self {
            is_outlier_block: statistic < critical_value,
            statistic,
            critical_value,
            t: suspected_indices.len(),
            suspected_indices,
            direction,
        }
    }

    /// `t = 0`: nothing suspected, nothing tested.
    fn empty(direction: Direction) -> Self {
        Self {
            is_outlier_block: false,
            statistic: 1.0,
            critical_value: 0.0,
            suspected_indices: Vec::new(),
            direction,
            t: 0,
        }
    }

    /// Indices to exclude from fusion.
    pub fn excluded(&self) -> &[usize] {
        if self.is_outlier_block {
            &self.suspected_indices
        } else {
            &[]
        }
    }
}

/// Permutation that sorts `data` ascending (stable).
pub fn argsort(data: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by(|&a, &b| data[a].total_cmp(&data[b]));
    idx
}

pub(crate) fn sorted_copy(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn check_sorted(sorted: &[f64]) -> Result<()> {
    if sorted.windows(2).all(|w| w[0] <= w[1]) {
        Ok(())
    } else {
        Err(Error::Unsorted)
    }
}

pub(crate) fn check_finite(data: &[f64]) -> Result<()> {
    if data.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("non-finite value in data".into()))
    }
}

fn check_block(n: usize, t: usize) -> Result<()> {
    if t >= n {
        Err(Error::BlockTooLarge { t, n })
    } else {
        Ok(())
    }
}

/// Tietjen-Moore test for the `t` largest values.
pub fn tm_upper_test(data: &[f64], t: usize, critical: &Critical<'_>) -> Result<OutlierVerdict> {
    check_finite(data)?;
    check_block(data.len(), t)?;
    if t == 0 {
        return Ok(OutlierVerdict::empty(Direction::Upper));
    }
    let order = argsort(data);
    let sorted: Vec<f64> = order.iter().map(|&i| data[i]).collect();
    let statistic = tm_upper_statistic(&sorted, t)?;
    let cv = critical.value(TestKind::TmUpper, data.len(), t)?;
    let suspects = order.iter().rev().take(t).copied().collect();
    Ok(OutlierVerdict::decide(statistic, cv, suspects, Direction::Upper))
}

/// Tietjen-Moore test for the `t` smallest values.
pub fn tm_lower_test(data: &[f64], t: usize, critical: &Critical<'_>) -> Result<OutlierVerdict> {
    check_finite(data)?;
    check_block(data.len(), t)?;
    if t == 0 {
        return Ok(OutlierVerdict::empty(Direction::Lower));
    }
    let order = argsort(data);
    let sorted: Vec<f64> = order.iter().map(|&i| data[i]).collect();
    let statistic = tm_lower_statistic(&sorted, t)?;
    let cv = critical.value(TestKind::TmLower, data.len(), t)?;
    let suspects = order.iter().take(t).copied().collect();
    Ok(OutlierVerdict::decide(statistic, cv, suspects, Direction::Lower))
}

/// Tietjen-Moore test on absolute residuals about the mean; the `t` largest
/// residuals form the suspected block.
pub fn tm_bidirectional(data: &[f64], t: usize, critical: &Critical<'_>) -> Result<OutlierVerdict> {
    check_finite(data)?;
    check_block(data.len(), t)?;
    if t == 0 {
        return Ok(OutlierVerdict::empty(Direction::Bidirectional));
    }
    let (order, residuals) = tm_residuals(data);
    let statistic = tm_upper_statistic(&residuals, t)?;
    let cv = critical.value(TestKind::TmResidual, data.len(), t)?;
    let suspects = order.iter().rev().take(t).copied().collect();
    Ok(OutlierVerdict::decide(
        statistic,
        cv,
        suspects,
        Direction::Bidirectional,
    ))
}

/// Shapiro-Wilk test of the whole sample; `direction` decides which `t`
/// points are held suspect if normality is rejected.
pub fn sw_test(data: &[f64], t: usize, direction: Direction, critical: &Critical<'_>) -> Result<OutlierVerdict> {
    check_finite(data)?;
    check_block(data.len(), t)?;
    if t == 0 {
        return Ok(OutlierVerdict::empty(direction));
    }
    let order = argsort(data);
    let sorted: Vec<f64> = order.iter().map(|&i| data[i]).collect();
    let coeffs = sw_coefficients(data.len())?;
    let statistic = sw_statistic(&sorted, coeffs)?;
    let cv = critical.value(TestKind::Sw, data.len(), t)?;
    let suspects = match direction {
        Direction::Upper => order.iter().rev().take(t).copied().collect(),
        Direction::Lower => order.iter().take(t).copied().collect(),
        Direction::Bidirectional => tm_residuals(data).0.iter().rev().take(t).copied().collect(),
    };
    Ok(OutlierVerdict::decide(statistic, cv, suspects, direction))
}

/// Dispatches to the TM or SW test for `direction`.
pub fn block_test(
    test: BlockTest,
    data: &[f64],
    t: usize,
    direction: Direction,
    critical: &Critical<'_>,
) -> Result<OutlierVerdict> {
    match (test, direction) {
        (BlockTest::Tm, Direction::Upper) => tm_upper_test(data, t, critical),
        (BlockTest::Tm, Direction::Lower) => tm_lower_test(data, t, critical),
        (BlockTest::Tm, Direction::Bidirectional) => tm_bidirectional(data, t, critical),
        (BlockTest::Sw, d) => sw_test(data, t, d, critical),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed_table() -> CriticalValueTable {
        // small but deterministic; these tests only need clear-cut decisions
        build_critical_table(&TableSpec {
            kinds: TestKind::FIXED.to_vec(),
            n_min: 20,
            n_max: 20,
            alpha: 0.05,
            replications: 20_000,
            seed: 1,
        })
        .unwrap()
    }

    #[test]
    fn bidirectional_flags_symmetric_extremes() {
        let table = fixed_table();
        let critical = table.at(0.05);
        let mut data: Vec<f64> = (0..18).map(|i| (i as f64 - 8.5) * 1e-3).collect();
        data.insert(4, -5.0);
        data.push(5.0);
        let verdict = tm_bidirectional(&data, 2, &critical).unwrap();
        assert!(verdict.is_outlier_block);
        let mut s = verdict.suspected_indices.clone();
        s.sort();
        assert_eq!(s, vec![4, 19]);
        let none = tm_bidirectional(&data, 0, &critical).unwrap();
        assert_eq!(none.statistic, 1.0);
        assert!(!none.is_outlier_block);
        assert!(matches!(
            tm_bidirectional(&data, 20, &critical),
            Err(Error::BlockTooLarge { .. })
        ));
    }

    #[test]
    fn upper_and_lower_tests_pick_the_right_tail() {
        let table = fixed_table();
        let critical = table.at(0.05);
        let mut data: Vec<f64> = (0..20).map(|i| 1.0 + 0.001 * ((i * 7) % 20) as f64).collect();
        data[3] = 1.5;
        data[9] = 1.6;
        let up = tm_upper_test(&data, 2, &critical).unwrap();
        assert!(up.is_outlier_block);
        assert_eq!(up.suspected_indices, vec![9, 3]);
        assert_eq!(up.excluded(), &[9, 3]);
        let down = tm_lower_test(&data, 2, &critical).unwrap();
        assert!(!down.is_outlier_block);
        assert!(down.excluded().is_empty());
        let sw = sw_test(&data, 2, Direction::Upper, &critical).unwrap();
        assert!(sw.is_outlier_block);
        assert_eq!(sw.suspected_indices, vec![9, 3]);
    }

    #[test]
    fn missing_critical_value_is_reported() {
        let table = fixed_table();
        let critical = table.at(0.01);
        let data: Vec<f64> = (0..20).map(f64::from).collect();
        assert!(matches!(
            tm_upper_test(&data, 1, &critical),
            Err(Error::MissingCriticalValue { .. })
        ));
    }
}
