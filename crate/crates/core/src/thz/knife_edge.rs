//! Knife-edge beam-size fitting.
//!
//! A knife edge translated across the Gaussian focus
//! `G(x, y) = exp(-x^2/sigma_x^2 - y^2/sigma_y^2)` transmits
//! `P(x) = (P0/2) erfc((x - x0)/sigma)`; fitting the three parameters to a
//! measured scan recovers the 1/e field radius along the scan axis.

use serde::{Deserialize, Serialize};

use super::ThzError;

const SQRT_PI: f64 = 1.772_453_850_905_516;
/// `2 * inverse_erfc(1/2)`: transition width between the 25% and 75%
/// transmission points in units of `sigma`.
const QUARTILE_WIDTH: f64 = 0.953_872;
const MAX_ITERATIONS: usize = 200;

/// A knife-edge transmission scan: transmitted power versus edge position.
///
/// Positions must be strictly monotonic (a descending scan is stored
/// reversed); powers must be finite, non-negative, and not all equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnifeEdgeScan {
    positions: Vec<f64>,
    powers: Vec<f64>,
}

impl KnifeEdgeScan {
    pub const MIN_POINTS: usize = 5;

    pub fn new(positions: Vec<f64>, powers: Vec<f64>) -> Result<Self, ThzError> {
        if positions.len() != powers.len() {
            return Err(ThzError::ScanLengthMismatch {
                positions: positions.len(),
                powers: powers.len(),
            });
        }
        if positions.len() < Self::MIN_POINTS {
            return Err(ThzError::ScanTooShort {
                min: Self::MIN_POINTS,
                got: positions.len(),
            });
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(ThzError::NonMonotonicPositions);
        }
        let ascending = positions.windows(2).all(|w| w[0] < w[1]);
        let descending = positions.windows(2).all(|w| w[0] > w[1]);
        if !ascending && !descending {
            return Err(ThzError::NonMonotonicPositions);
        }
        if powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(ThzError::InvalidPowers);
        }
        if powers.iter().all(|p| *p == powers[0]) {
            return Err(ThzError::DegenerateScan);
        }
        let (mut positions, mut powers) = (positions, powers);
        if descending {
            positions.reverse();
            powers.reverse();
        }
        Ok(Self { positions, powers })
    }

    /// Edge positions in ascending order, m.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Transmitted powers, ordered like [`positions`](Self::positions).
    pub fn powers(&self) -> &[f64] {
        &self.powers
    }
}

/// Transmitted power behind a knife edge at `x` for a Gaussian beam of 1/e
/// field radius `sigma` centred at `x0` carrying total power `p0`.
pub fn knife_edge_model(p0: f64, x0: f64, sigma: f64, x: f64) -> f64 {
    0.5 * p0 * libm::erfc((x - x0) / sigma)
}

/// Converged knife-edge fit parameters, reported in the input frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnifeEdgeFit {
    /// Total beam power, scan units.
    pub p0: f64,
    /// Beam centre, m.
    pub x0: f64,
    /// 1/e field radius along the scan axis, m.
    pub sigma: f64,
    /// Damped least-squares iterations used.
    pub iterations: usize,
    pub residual_sum_squares: f64,
}

impl KnifeEdgeFit {
    /// The fitted model evaluated at `x`.
    pub fn model_at(&self, x: f64) -> f64 {
        knife_edge_model(self.p0, self.x0, self.sigma, x)
    }
}

/// Fits `P(x) = (P0/2) erfc((x - x0)/sigma)` to a scan by damped
/// (Levenberg-style) least squares with an analytic Jacobian.
///
/// The model assumes power falls with increasing position; a scan that
/// opens instead is mirrored internally and the fitted centre is mapped
/// back, so results are always in the caller's frame. Initial values come
/// from the data extremes, the 50% crossing, and the 25-75% crossing
/// width.
pub fn knife_edge_fit(scan: &KnifeEdgeScan) -> Result<KnifeEdgeFit, ThzError> {
    let n = scan.positions.len();
    let mirrored = scan.powers[0] < scan.powers[n - 1];
    let (xs, ps): (Vec<f64>, Vec<f64>) = if mirrored {
        (
            scan.positions.iter().rev().map(|x| -x).collect(),
            scan.powers.iter().rev().copied().collect(),
        )
    } else {
        (scan.positions.clone(), scan.powers.clone())
    };

    let mut params = initial_guess(&xs, &ps);
    let mut sse = sum_squares(&params, &xs, &ps);
    let mut lambda = 1e-3;
    for iteration in 1..=MAX_ITERATIONS {
        let (jtj, jtr) = normal_equations(&params, &xs, &ps);
        let mut damped = jtj;
        for k in 0..3 {
            damped[k][k] += lambda * jtj[k][k];
        }
        let Some(step) = solve3(damped, jtr) else {
            lambda *= 5.0;
            continue;
        };
        let candidate = [
            params[0] + step[0],
            params[1] + step[1],
            params[2] + step[2],
        ];
        let step_negligible = step
            .iter()
            .zip(&params)
            .all(|(d, p)| d.abs() <= 1e-12 * (p.abs() + f64::MIN_POSITIVE));
        if candidate[0] <= 0.0 || candidate[2] <= 0.0 || candidate.iter().any(|v| !v.is_finite()) {
            if step_negligible {
                return Ok(finish(params, sse, iteration, mirrored));
            }
            lambda *= 5.0;
            continue;
        }
        let candidate_sse = sum_squares(&candidate, &xs, &ps);
        if candidate_sse.is_finite() && candidate_sse <= sse {
            let improvement = sse - candidate_sse;
            params = candidate;
            let converged = improvement <= 1e-14 * sse;
            sse = candidate_sse;
            lambda = (lambda / 3.0).max(1e-12);
            if converged {
                return Ok(finish(params, sse, iteration, mirrored));
            }
        } else {
            if step_negligible {
                return Ok(finish(params, sse, iteration, mirrored));
            }
            lambda *= 5.0;
        }
    }
    Err(ThzError::FitDidNotConverge {
        iterations: MAX_ITERATIONS,
    })
}

fn finish(params: [f64; 3], sse: f64, iterations: usize, mirrored: bool) -> KnifeEdgeFit {
    KnifeEdgeFit {
        p0: params[0],
        x0: if mirrored { -params[1] } else { params[1] },
        sigma: params[2],
        iterations,
        residual_sum_squares: sse,
    }
}

fn initial_guess(xs: &[f64], ps: &[f64]) -> [f64; 3] {
    let p0 = ps.iter().cloned().fold(0.0f64, f64::max);
    let span = xs[xs.len() - 1] - xs[0];
    let mid = 0.5 * (xs[0] + xs[xs.len() - 1]);
    let x0 = crossing(xs, ps, 0.5 * p0).unwrap_or(mid);
    let sigma = match (crossing(xs, ps, 0.75 * p0), crossing(xs, ps, 0.25 * p0)) {
        (Some(x75), Some(x25)) if x25 > x75 => (x25 - x75) / QUARTILE_WIDTH,
        _ => span / 4.0,
    };
    [p0, x0, sigma]
}

/// First downward crossing of `level`, linearly interpolated.
fn crossing(xs: &[f64], ps: &[f64], level: f64) -> Option<f64> {
    for i in 0..ps.len() - 1 {
        if ps[i] >= level && ps[i + 1] < level {
            let t = (level - ps[i]) / (ps[i + 1] - ps[i]);
            return Some(xs[i] + t * (xs[i + 1] - xs[i]));
        }
    }
    None
}

fn sum_squares(params: &[f64; 3], xs: &[f64], ps: &[f64]) -> f64 {
    let [p0, x0, sigma] = *params;
    xs.iter()
        .zip(ps)
        .map(|(&x, &p)| {
            let r = p - knife_edge_model(p0, x0, sigma, x);
            r * r
        })
        .sum()
}

#[allow(clippy::needless_range_loop)]
fn normal_equations(params: &[f64; 3], xs: &[f64], ps: &[f64]) -> ([[f64; 3]; 3], [f64; 3]) {
    let [p0, x0, sigma] = *params;
    let mut jtj = [[0.0; 3]; 3];
    let mut jtr = [0.0; 3];
    for (&x, &p) in xs.iter().zip(ps) {
        let u = (x - x0) / sigma;
        let gauss = (-u * u).exp();
        let jac = [
            0.5 * libm::erfc(u),
            p0 * gauss / (sigma * SQRT_PI),
            p0 * u * gauss / (sigma * SQRT_PI),
        ];
        let r = p - knife_edge_model(p0, x0, sigma, x);
        for a in 0..3 {
            jtr[a] += jac[a] * r;
            for b in a..3 {
                jtj[a][b] += jac[a] * jac[b];
            }
        }
    }
    for a in 0..3 {
        for b in 0..a {
            jtj[a][b] = jtj[b][a];
        }
    }
    (jtj, jtr)
}

/// Solves a 3x3 system by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    const SIGMA: f64 = 200e-6;
    const CENTRE: f64 = 30e-6;
    const POWER: f64 = 2.3e-3;

    fn grid() -> Vec<f64> {
        (0..49).map(|i| -600e-6 + i as f64 * 25e-6).collect()
    }

    fn clean_scan() -> KnifeEdgeScan {
        let xs = grid();
        let ps = xs
            .iter()
            .map(|&x| knife_edge_model(POWER, CENTRE, SIGMA, x))
            .collect();
        KnifeEdgeScan::new(xs, ps).unwrap()
    }

    #[test]
    fn noise_free_scan_recovers_generator_parameters() {
        let fit = knife_edge_fit(&clean_scan()).unwrap();
        assert!(
            (fit.sigma - SIGMA).abs() < 1e-4 * SIGMA,
            "sigma {}",
            fit.sigma
        );
        assert!((fit.p0 - POWER).abs() < 1e-4 * POWER);
        assert!((fit.x0 - CENTRE).abs() < 1e-4 * SIGMA);
        assert!(fit.iterations >= 1);
        assert!(
            fit.residual_sum_squares < 1e-30,
            "rss {}",
            fit.residual_sum_squares
        );
    }

    #[test]
    fn fitted_model_has_erfc_limits() {
        let fit = knife_edge_fit(&clean_scan()).unwrap();
        let open = fit.model_at(fit.x0 - 6.0 * fit.sigma);
        let blocked = fit.model_at(fit.x0 + 6.0 * fit.sigma);
        assert!((open - fit.p0).abs() < 1e-12 * fit.p0);
        assert!(blocked < 1e-12 * fit.p0);
    }

    #[test]
    fn opening_scan_is_reported_in_the_input_frame() {
        let closing = clean_scan();
        let xs: Vec<f64> = closing.positions().iter().rev().map(|x| -x).collect();
        let ps: Vec<f64> = closing.powers().iter().rev().copied().collect();
        let opening = KnifeEdgeScan::new(xs, ps).unwrap();
        let fit = knife_edge_fit(&opening).unwrap();
        assert!((fit.sigma - SIGMA).abs() < 1e-4 * SIGMA);
        assert!((fit.x0 + CENTRE).abs() < 1e-4 * SIGMA, "x0 {}", fit.x0);
        assert!((fit.p0 - POWER).abs() < 1e-4 * POWER);
    }

    #[test]
    fn descending_position_order_is_accepted() {
        let scan = clean_scan();
        let xs: Vec<f64> = scan.positions().iter().rev().copied().collect();
        let ps: Vec<f64> = scan.powers().iter().rev().copied().collect();
        let fit = knife_edge_fit(&KnifeEdgeScan::new(xs, ps).unwrap()).unwrap();
        assert!((fit.sigma - SIGMA).abs() < 1e-4 * SIGMA);
        assert!((fit.x0 - CENTRE).abs() < 1e-4 * SIGMA);
    }

    #[test]
    fn mean_sigma_over_noisy_scans_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6e1f_e00d);
        let xs = grid();
        let mut total = 0.0;
        let scans = 100;
        for _ in 0..scans {
            let ps: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    let noise: f64 = rng.sample(StandardNormal);
                    knife_edge_model(POWER, CENTRE, SIGMA, x) * (1.0 + 0.01 * noise)
                })
                .collect();
            let fit = knife_edge_fit(&KnifeEdgeScan::new(xs.clone(), ps).unwrap()).unwrap();
            assert!((fit.sigma - SIGMA).abs() < 0.1 * SIGMA);
            total += fit.sigma;
        }
        let mean = total / scans as f64;
        assert!(
            (mean - SIGMA).abs() < 0.01 * SIGMA,
            "mean sigma {mean} vs {SIGMA}"
        );
    }

    #[test]
    fn scan_validation_rejects_malformed_input() {
        assert!(matches!(
            KnifeEdgeScan::new(vec![0.0; 4], vec![0.0; 5]),
            Err(ThzError::ScanLengthMismatch { .. })
        ));
        assert!(matches!(
            KnifeEdgeScan::new(vec![0.0, 1.0, 2.0], vec![3.0, 2.0, 1.0]),
            Err(ThzError::ScanTooShort { min: 5, got: 3 })
        ));
        assert!(matches!(
            KnifeEdgeScan::new(vec![0.0, 1.0, 1.0, 2.0, 3.0], vec![5.0, 4.0, 3.0, 2.0, 1.0]),
            Err(ThzError::NonMonotonicPositions)
        ));
        assert!(matches!(
            KnifeEdgeScan::new(
                vec![0.0, 1.0, f64::NAN, 2.0, 3.0],
                vec![5.0, 4.0, 3.0, 2.0, 1.0]
            ),
            Err(ThzError::NonMonotonicPositions)
        ));
        assert!(matches!(
            KnifeEdgeScan::new(
                vec![0.0, 1.0, 2.0, 3.0, 4.0],
                vec![5.0, 4.0, -1.0, 2.0, 1.0]
            ),
            Err(ThzError::InvalidPowers)
        ));
        assert!(matches!(
            KnifeEdgeScan::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![2.0; 5]),
            Err(ThzError::DegenerateScan)
        ));
    }
}
