use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by construction and verification.
///
/// Construction (`rank`, `orth`) is two orders of magnitude tighter than
/// membership (`mem`), and the fail threshold sits three orders above the
/// orthogonality tolerance. Values between `orth` and `fail` are reported as
/// inconclusive rather than as violations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual below which a Gram–Schmidt candidate is dependent.
    pub rank: f64,
    /// Orthogonality / orthonormality tolerance.
    pub orth: f64,
    /// Membership tolerance, scaled by `max(‖f‖, 1)`.
    pub mem: f64,
    /// Relative magnitude below which a degree block counts as absent.
    pub drop: f64,
    /// Relative violation above which a check fails outright.
    pub fail: f64,
    /// Fraction of boundary-skipped triples above which a passing check
    /// becomes inconclusive.
    pub max_skip_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-10,
            orth: 1e-9,
            mem: 1e-8,
            drop: 1e-13,
            fail: 1e-6,
            max_skip_fraction: 0.25,
        }
    }
}

impl Tolerances {
    /// Defaults, overridden by the environment as in [`Tolerances::with_env`].
    pub fn from_env() -> Self {
        Tolerances::default().with_env()
    }

    /// Replaces each field whose variable (`HARDY_TOL_RANK`, `HARDY_TOL_ORTH`,
    /// `HARDY_TOL_MEM`, `HARDY_TOL_DROP`, `HARDY_TOL_FAIL`) is set and parses
    /// as a float.
    pub fn with_env(mut self) -> Self {
        let read = |key: &str, slot: &mut f64| {
            if let Some(v) = std::env::var(key).ok().and_then(|s| s.parse::<f64>().ok()) {
                *slot = v;
            }
        };
        read("HARDY_TOL_RANK", &mut self.rank);
        read("HARDY_TOL_ORTH", &mut self.orth);
        read("HARDY_TOL_MEM", &mut self.mem);
        read("HARDY_TOL_DROP", &mut self.drop);
        read("HARDY_TOL_FAIL", &mut self.fail);
        self
    }
}
