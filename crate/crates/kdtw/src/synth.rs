//! Generators for the synthetic curve families and the adversarial fixtures
//! used throughout the test pipelines.
//!
//! The synthetic ensemble consists of three 1-dimensional families of
//! complexity `4*m_hat + 1` that start and end at zero: type A curves carry a
//! few tall peaks over small noise, type B curves sit near the peak height
//! everywhere, and type C curves stay near zero. The fixture constructors
//! reproduce specific curve pairs with known closed-form distances.

use rand::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Curve;
use crate::seeded::stream_rng;

/// Parameters of the synthetic A/B/C ensemble.
#[derive(Debug, Clone)]
pub struct SynthParams {
    /// Curve complexity, must be of the form `4*m_hat + 1`.
    pub m_total: usize,
    /// Bound on the "small values" drawn at non-peak even indices.
    pub epsilon: f64,
    /// Peak height for type A and base height for type B.
    pub peak_height: f64,
    /// Number of peaks for type A curves.
    pub peaks: usize,
    /// Curves generated per type.
    pub count_per_type: usize,
    pub seed: u64,
}

impl SynthParams {
    /// Ensemble with the published defaults for a given complexity:
    /// `L = 2 ln(m)`, `epsilon = 0.2`, peaks cycling over `5..=8` (clamped
    /// when the curve is too short).
    pub fn default_for(m_total: usize, count_per_type: usize, seed: u64) -> Result<SynthParams> {
        if m_total < 5 || m_total % 4 != 1 {
            return Err(Error::InvalidParameter(format!(
                "m_total must be of the form 4*m_hat+1 with m_hat >= 1, got {m_total}"
            )));
        }
        let params = SynthParams {
            m_total,
            epsilon: 0.2,
            peak_height: 2.0 * (m_total as f64).ln(),
            peaks: 5.min((m_total - 1) / 2),
            count_per_type,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn m_hat(&self) -> usize {
        (self.m_total - 1) / 4
    }

    /// Recommended k-DTW parameter `floor(2.5 ln(m))` for this complexity.
    pub fn recommended_k(&self) -> usize {
        (2.5 * (self.m_total as f64).ln()).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_total < 5 || self.m_total % 4 != 1 {
            return Err(Error::InvalidParameter(format!(
                "m_total must be of the form 4*m_hat+1 with m_hat >= 1, got {}",
                self.m_total
            )));
        }
        if self.epsilon >= self.peak_height {
            return Err(Error::InvalidParameter(
                "epsilon must be smaller than the peak height".into(),
            ));
        }
        if self.peaks > 2 * self.m_hat() {
            return Err(Error::InvalidParameter(format!(
                "{} peaks do not fit into {} even indices",
                self.peaks,
                2 * self.m_hat()
            )));
        }
        Ok(())
    }
}

/// Type A: zeros at odd indices, `peaks` peaks of height L at random even
/// indices, small values in [0, epsilon] at the remaining even indices.
pub fn gen_type_a(params: &SynthParams, peaks: usize, rng: &mut impl Rng) -> Result<Curve> {
    params.validate()?;
    let even_slots = 2 * params.m_hat();
    if peaks > even_slots {
        return Err(Error::InvalidParameter(format!(
            "{peaks} peaks do not fit into {even_slots} even indices"
        )));
    }
    let mut values = vec![0.0; params.m_total];
    let mut slots: Vec<usize> = (1..=even_slots).map(|i| 2 * i - 1).collect(); // 0-based even indices
    // Seeded Fisher-Yates prefix picks the peak positions.
    for i in 0..peaks {
        let j = rng.gen_range(i..slots.len());
        slots.swap(i, j);
    }
    let peak_slots = &slots[..peaks];
    for &idx in &slots[peaks..] {
        values[idx] = rng.gen_range(0.0..=params.epsilon);
    }
    for &idx in peak_slots {
        values[idx] = params.peak_height;
    }
    Curve::from_values(&values)
}

/// Type B: zero endpoints, height L at interior odd indices, values in
/// [L, L+epsilon] at even indices.
pub fn gen_type_b(params: &SynthParams, rng: &mut impl Rng) -> Result<Curve> {
    params.validate()?;
    let mut values = vec![0.0; params.m_total];
    for i in 1..=(2 * params.m_hat() - 1) {
        values[2 * i] = params.peak_height; // 1-based index 2i+1
    }
    for i in 1..=(2 * params.m_hat()) {
        values[2 * i - 1] = params.peak_height + rng.gen_range(0.0..=params.epsilon);
    }
    Curve::from_values(&values)
}

/// Type C: zeros at odd indices, small values in [0, epsilon] at even indices.
pub fn gen_type_c(params: &SynthParams, rng: &mut impl Rng) -> Result<Curve> {
    params.validate()?;
    let mut values = vec![0.0; params.m_total];
    for i in 1..=(2 * params.m_hat()) {
        values[2 * i - 1] = rng.gen_range(0.0..=params.epsilon);
    }
    Curve::from_values(&values)
}

/// One generated ensemble curve with its type label.
#[derive(Debug, Clone)]
pub struct EnsembleCurve {
    pub id: String,
    /// 0 for type A, 1 for type B, 2 for type C.
    pub label: i64,
    pub curve: Curve,
}

/// Generates `count_per_type` curves of each type; type A curves cycle their
/// peak count over `peaks..=peaks+3`. Each curve draws from its own derived
/// seed, so generation order and parallelism cannot change the output.
pub fn gen_ensemble(params: &SynthParams) -> Result<Vec<EnsembleCurve>> {
    params.validate()?;
    let mut out = Vec::with_capacity(3 * params.count_per_type);
    for ty in 0..3u64 {
        for idx in 0..params.count_per_type {
            let mut rng = stream_rng(params.seed, ty * 1_000_003 + idx as u64);
            let (name, curve) = match ty {
                0 => {
                    let peaks = params.peaks + idx % 4;
                    let peaks = peaks.min(2 * params.m_hat());
                    (format!("A{}_{idx}", peaks), gen_type_a(params, peaks, &mut rng)?)
                }
                1 => (format!("B_{idx}"), gen_type_b(params, &mut rng)?),
                _ => (format!("C_{idx}"), gen_type_c(params, &mut rng)?),
            };
            out.push(EnsembleCurve {
                id: name,
                label: ty as i64,
                curve,
            });
        }
    }
    Ok(out)
}

/// The tight witness for the k-relaxed triangle inequality:
/// `sigma = (0,...,0)`, `tau = (0,eps,...,eps,0)`, `upsilon = (0,eps,0,...,0)`,
/// all of complexity `m >= 3`. For `k <= m-2` the k-DTW triple is
/// `(k*eps, eps, 0)`.
pub fn triangle_fixture(m: usize, epsilon: f64) -> Result<(Curve, Curve, Curve)> {
    if m < 3 {
        return Err(Error::InvalidParameter("triangle fixture needs m >= 3".into()));
    }
    let sigma = Curve::from_values(&vec![0.0; m])?;
    let mut tau = vec![epsilon; m];
    tau[0] = 0.0;
    tau[m - 1] = 0.0;
    let mut upsilon = vec![0.0; m];
    upsilon[1] = epsilon;
    Ok((
        sigma,
        Curve::from_values(&tau)?,
        Curve::from_values(&upsilon)?,
    ))
}

/// `m_hat` concatenated K-gadgets with `eps = L/10`: four vertices per gadget
/// at offset `4tL`. The optimal k-DTW traversal is one step shorter per gadget
/// than the optimal DTW traversal.
pub fn k_gadget_curves(m_hat: usize, peak: f64) -> Result<(Curve, Curve)> {
    if m_hat == 0 || peak <= 0.0 {
        return Err(Error::InvalidParameter(
            "need m_hat >= 1 and a positive gadget height".into(),
        ));
    }
    let eps = peak / 10.0;
    let mut sigma = Vec::with_capacity(4 * m_hat);
    let mut tau = Vec::with_capacity(4 * m_hat);
    for t in 0..m_hat {
        let off = 4.0 * t as f64 * peak;
        sigma.extend_from_slice(&[
            off + peak,
            off + peak - eps / 2.0,
            off + peak + eps / 2.0,
            off + peak + 1.5 * eps,
        ]);
        tau.extend_from_slice(&[
            off,
            off - eps / 2.0,
            off + peak - eps / 2.0,
            off + peak + eps / 2.0,
        ]);
    }
    Ok((Curve::from_values(&sigma)?, Curve::from_values(&tau)?))
}

/// `m_hat` concatenated D-gadgets with `eps = L/10`. Mirror construction where
/// the optimal k-DTW traversal is one step longer per gadget than the optimal
/// DTW traversal.
pub fn d_gadget_curves(m_hat: usize, peak: f64) -> Result<(Curve, Curve)> {
    if m_hat == 0 || peak <= 0.0 {
        return Err(Error::InvalidParameter(
            "need m_hat >= 1 and a positive gadget height".into(),
        ));
    }
    let eps = peak / 10.0;
    let mut sigma = Vec::with_capacity(4 * m_hat);
    let mut tau = Vec::with_capacity(4 * m_hat);
    for t in 0..m_hat {
        let off = 4.0 * t as f64 * peak;
        sigma.extend_from_slice(&[
            off + peak,
            off + peak + eps / 2.0,
            off + peak + eps / 2.0,
            off + peak + 1.5 * eps,
        ]);
        tau.extend_from_slice(&[
            off,
            off,
            off + peak - eps / 2.0,
            off + peak - eps / 2.0,
        ]);
    }
    Ok((Curve::from_values(&sigma)?, Curve::from_values(&tau)?))
}

/// Curve pair whose unique optimal DTW traversal has length `2m - 5` while a
/// length `m + 1` traversal realizes k-DTW for every `k <= m - 3`:
/// `sigma = (0, -eps, 2,...,2, 3, 1, 2)` and
/// `tau = (1, 1-eps, 3+eps^2, 1,...,1, 2, 2)`.
///
/// The closed-form costs hold for large `m`; values below 1000 are accepted
/// for structural tests but carry no guarantee.
pub fn long_short_fixture(m: usize, epsilon: f64) -> Result<(Curve, Curve)> {
    if m < 8 {
        return Err(Error::InvalidParameter(
            "long/short fixture needs m >= 8".into(),
        ));
    }
    let mut sigma = Vec::with_capacity(m);
    sigma.push(0.0);
    sigma.push(-epsilon);
    sigma.extend(std::iter::repeat(2.0).take(m - 5));
    sigma.extend_from_slice(&[3.0, 1.0, 2.0]);

    let mut tau = Vec::with_capacity(m);
    tau.push(1.0);
    tau.push(1.0 - epsilon);
    tau.push(3.0 + epsilon * epsilon);
    tau.extend(std::iter::repeat(1.0).take(m - 5));
    tau.extend_from_slice(&[2.0, 2.0]);

    Ok((Curve::from_values(&sigma)?, Curve::from_values(&tau)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance_matrix;
    use crate::kdtw::{kdtw_exact, Heuristics};
    use crate::measures::dtw_q;
    use crate::traversal::{oracle_dtw_q, oracle_frechet, oracle_kdtw};

    fn params(m_total: usize) -> SynthParams {
        SynthParams::default_for(m_total, 2, 7).unwrap()
    }

    #[test]
    fn type_c_with_zero_epsilon_is_all_zeros() {
        let mut p = params(9);
        p.epsilon = 0.0;
        let mut rng = stream_rng(1, 0);
        let c = gen_type_c(&p, &mut rng).unwrap();
        assert!(c.vertices().iter().all(|v| v.coords()[0] == 0.0));
    }

    #[test]
    fn type_a_with_max_peaks_fills_every_even_index() {
        let p = params(9);
        let mut rng = stream_rng(2, 0);
        let c = gen_type_a(&p, 2 * p.m_hat(), &mut rng).unwrap();
        for (idx, v) in c.vertices().iter().enumerate() {
            let value = v.coords()[0];
            if (idx + 1) % 2 == 0 {
                assert_eq!(value, p.peak_height);
            } else {
                assert_eq!(value, 0.0);
            }
        }
    }

    #[test]
    fn type_a_layout_and_peak_count() {
        let p = params(13);
        let mut rng = stream_rng(3, 0);
        let c = gen_type_a(&p, 3, &mut rng).unwrap();
        assert_eq!(c.len(), 13);
        let mut peaks = 0;
        for (idx, v) in c.vertices().iter().enumerate() {
            let value = v.coords()[0];
            if (idx + 1) % 2 == 1 {
                assert_eq!(value, 0.0, "odd index {idx} must be zero");
            } else if value == p.peak_height {
                peaks += 1;
            } else {
                assert!((0.0..=p.epsilon).contains(&value));
            }
        }
        assert_eq!(peaks, 3);
    }

    #[test]
    fn type_b_layout() {
        let p = params(13);
        let mut rng = stream_rng(4, 0);
        let c = gen_type_b(&p, &mut rng).unwrap();
        let values: Vec<f64> = c.vertices().iter().map(|v| v.coords()[0]).collect();
        assert_eq!(values[0], 0.0);
        assert_eq!(values[12], 0.0);
        for (idx, &value) in values.iter().enumerate() {
            let pos = idx + 1; // 1-based
            if pos == 1 || pos == 13 {
                continue;
            }
            if pos % 2 == 1 {
                assert_eq!(value, p.peak_height);
            } else {
                assert!((p.peak_height..=p.peak_height + p.epsilon).contains(&value));
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let p = params(17);
        let a = gen_ensemble(&p).unwrap();
        let b = gen_ensemble(&p).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.id, y.id);
            assert_eq!(x.curve, y.curve);
        }
    }

    #[test]
    fn triangle_fixture_oracle_values() {
        let (sigma, tau, upsilon) = triangle_fixture(5, 0.2).unwrap();
        let dst = distance_matrix(&sigma, &tau).unwrap();
        let dsu = distance_matrix(&sigma, &upsilon).unwrap();
        let dut = distance_matrix(&upsilon, &tau).unwrap();
        for k in 1..=3 {
            assert!((oracle_kdtw(&dst, k, None).unwrap().0 - k as f64 * 0.2).abs() < 1e-12);
            assert!((oracle_kdtw(&dsu, k, None).unwrap().0 - 0.2).abs() < 1e-12);
            assert!(oracle_kdtw(&dut, k, None).unwrap().0.abs() < 1e-12);
        }
        // k = 1 is the plain Frechet triple.
        assert!((oracle_frechet(&dst, None).unwrap().0 - 0.2).abs() < 1e-12);
        assert!((oracle_frechet(&dsu, None).unwrap().0 - 0.2).abs() < 1e-12);
        assert!(oracle_frechet(&dut, None).unwrap().0.abs() < 1e-12);
    }

    #[test]
    fn triangle_fixture_zero_epsilon() {
        let (sigma, tau, upsilon) = triangle_fixture(5, 0.0).unwrap();
        for (a, b) in [(&sigma, &tau), (&sigma, &upsilon), (&upsilon, &tau)] {
            let d = distance_matrix(a, b).unwrap();
            assert_eq!(oracle_kdtw(&d, 2, None).unwrap().0, 0.0);
        }
    }

    #[test]
    fn triangle_fixture_guard() {
        assert!(triangle_fixture(2, 0.1).is_err());
    }

    #[test]
    fn single_k_gadget_oracle_values() {
        let (sigma, tau) = k_gadget_curves(1, 10.0).unwrap();
        let d = distance_matrix(&sigma, &tau).unwrap();
        // k-DTW values from exhaustive enumeration.
        assert!((oracle_kdtw(&d, 1, None).unwrap().0 - 10.0).abs() < 1e-12);
        assert!((oracle_kdtw(&d, 2, None).unwrap().0 - 20.0).abs() < 1e-12);
        assert!((oracle_kdtw(&d, 3, None).unwrap().0 - 21.0).abs() < 1e-12);
        // DTW agrees with its enumeration oracle.
        let dtw = dtw_q(&d, 1.0, false).unwrap().value;
        assert!((dtw - oracle_dtw_q(&d, 1.0, None).unwrap().0).abs() < 1e-12);
    }

    #[test]
    fn single_d_gadget_oracle_values() {
        let (sigma, tau) = d_gadget_curves(1, 10.0).unwrap();
        let d = distance_matrix(&sigma, &tau).unwrap();
        assert!((dtw_q(&d, 1.0, false).unwrap().value - 23.5).abs() < 1e-12);
        assert!((oracle_kdtw(&d, 1, None).unwrap().0 - 10.0).abs() < 1e-12);
        assert!((oracle_kdtw(&d, 2, None).unwrap().0 - 20.0).abs() < 1e-12);
        assert!((oracle_kdtw(&d, 3, None).unwrap().0 - 22.0).abs() < 1e-12);
        assert!((oracle_kdtw(&d, 4, None).unwrap().0 - 23.0).abs() < 1e-12);
    }

    #[test]
    fn d_gadget_traversal_lengths_differ_by_one_per_gadget() {
        for m_hat in [1, 2, 3] {
            let (sigma, tau) = d_gadget_curves(m_hat, 10.0).unwrap();
            let d = distance_matrix(&sigma, &tau).unwrap();
            let dtw = dtw_q(&d, 1.0, true).unwrap();
            let kd = kdtw_exact(&d, m_hat, Heuristics::ALL, true).unwrap();
            let dtw_len = dtw.traversal.unwrap().len();
            let kd_len = kd.traversal.unwrap().len();
            assert_eq!(dtw_len, 4 * m_hat);
            assert_eq!(kd_len, 5 * m_hat);
        }
    }

    #[test]
    fn long_short_fixture_structure() {
        let (sigma, tau) = long_short_fixture(12, 0.1).unwrap();
        assert_eq!(sigma.len(), 12);
        assert_eq!(tau.len(), 12);
        assert_eq!(sigma.vertex(0).coords()[0], 0.0);
        assert_eq!(sigma.vertex(1).coords()[0], -0.1);
        assert_eq!(sigma.vertex(9).coords()[0], 3.0);
        assert_eq!(tau.vertex(2).coords()[0], 3.0 + 0.01);
        assert_eq!(tau.vertex(11).coords()[0], 2.0);
    }

    #[test]
    fn ensemble_dtw_separation_pattern() {
        // DTW(A, C) is far smaller than DTW(B, C): the triangle-violation
        // structure that confuses DTW-based clustering.
        let p = SynthParams::default_for(201, 1, 5).unwrap();
        let curves = gen_ensemble(&p).unwrap();
        let a = &curves[0].curve;
        let b = &curves[1].curve;
        let c = &curves[2].curve;
        let dac = dtw_q(&distance_matrix(a, c).unwrap(), 1.0, false).unwrap().value;
        let dbc = dtw_q(&distance_matrix(b, c).unwrap(), 1.0, false).unwrap().value;
        assert!(
            dac < dbc / 4.0,
            "expected DTW(A,C) << DTW(B,C), got {dac} vs {dbc}"
        );
    }
}
