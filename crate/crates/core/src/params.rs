//! Community parameters and their validation.

use crate::error::{Error, Result};

/// Economic and environment parameters of a service-exchange community.
///
/// A fulfilled request gives the client `benefit` and costs the server
/// `cost`. Agents discount the future by `discount` per period, a fraction
/// `turnover` of the population is replaced each period, and each report
/// about a server's action flips with probability `report_error`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommunityParams {
    pub benefit: f64,
    pub cost: f64,
    pub discount: f64,
    pub turnover: f64,
    pub report_error: f64,
    /// Cost of rejoining under a fresh identity; `None` disables whitewash checks.
    pub whitewash_cost: Option<f64>,
}

fn require(ok: bool, field: &'static str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            field,
            message: message.to_string(),
        })
    }
}

impl CommunityParams {
    /// Validates the raw values and returns the parameter set.
    pub fn new(
        benefit: f64,
        cost: f64,
        discount: f64,
        turnover: f64,
        report_error: f64,
    ) -> Result<Self> {
        require(
            cost.is_finite() && cost > 0.0,
            "cost",
            "must be positive and finite",
        )?;
        require(benefit.is_finite(), "benefit", "must be finite")?;
        if benefit <= cost {
            return Err(Error::BenefitNotAboveCost);
        }
        require(
            discount.is_finite() && (0.0..1.0).contains(&discount),
            "discount",
            "must lie in [0, 1)",
        )?;
        require(
            turnover.is_finite() && (0.0..=1.0).contains(&turnover),
            "turnover",
            "must lie in [0, 1]",
        )?;
        require(
            report_error.is_finite() && (0.0..=0.5).contains(&report_error),
            "report_error",
            "must lie in [0, 1/2]",
        )?;
        Ok(Self {
            benefit,
            cost,
            discount,
            turnover,
            report_error,
            whitewash_cost: None,
        })
    }

    /// Attaches a whitewashing cost.
    pub fn with_whitewash_cost(mut self, whitewash_cost: f64) -> Result<Self> {
        require(
            whitewash_cost.is_finite() && whitewash_cost >= 0.0,
            "whitewash_cost",
            "must be non-negative and finite",
        )?;
        self.whitewash_cost = Some(whitewash_cost);
        Ok(self)
    }

    /// Weight an agent puts on its future payoff: `discount * (1 - turnover)`.
    pub fn delta(&self) -> f64 {
        self.discount * (1.0 - self.turnover)
    }

    /// Discounted weight of staying on the promotion track: `delta * (1 - report_error)`.
    pub fn gamma(&self) -> f64 {
        self.delta() * (1.0 - self.report_error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_reference_parameters() {
        let p = CommunityParams::new(10.0, 1.0, 0.8, 0.1, 0.2).unwrap();
        assert!((p.delta() - 0.72).abs() < 1e-15);
        assert!((p.gamma() - 0.576).abs() < 1e-15);
        assert!(0.0 <= p.gamma() && p.gamma() <= p.delta() && p.delta() < 1.0);
    }

    #[test]
    fn rejects_benefit_not_above_cost() {
        assert_eq!(
            CommunityParams::new(1.0, 1.0, 0.8, 0.1, 0.2).unwrap_err(),
            Error::BenefitNotAboveCost
        );
    }

    #[test]
    fn rejects_out_of_range_report_error() {
        match CommunityParams::new(10.0, 1.0, 0.8, 0.1, 0.6).unwrap_err() {
            Error::OutOfRange { field, .. } => assert_eq!(field, "report_error"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_unit_discount_and_negative_whitewash_cost() {
        assert!(CommunityParams::new(10.0, 1.0, 1.0, 0.1, 0.2).is_err());
        let p = CommunityParams::new(10.0, 1.0, 0.8, 0.1, 0.2).unwrap();
        assert!(p.with_whitewash_cost(-1.0).is_err());
        assert_eq!(
            p.with_whitewash_cost(2.5).unwrap().whitewash_cost,
            Some(2.5)
        );
    }

    #[test]
    fn boundary_turnover_and_error_are_valid() {
        assert!(CommunityParams::new(10.0, 1.0, 0.0, 1.0, 0.5).is_ok());
        assert!(CommunityParams::new(10.0, 1.0, 0.0, 0.0, 0.0).is_ok());
    }
}
