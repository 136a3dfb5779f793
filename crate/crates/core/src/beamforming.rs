//! Hybrid analog/digital beamforming and achievable rates.
//!
//! One RF chain per user: the analog matrix `F_RF` (N×K) holds the trained
//! beams, the digital matrix `F_BB` (K×K) suppresses inter-user
//! interference on the effective channels `g_kᴴ = h_kᴴ F_RF`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::codebook::Codeword;
use crate::error::{Error, Result};

type CMatrix = DMatrix<Complex64>;
type CVector = DVector<Complex64>;

/// Singular-value ratio below which a matrix is treated as rank deficient
/// (a Gram condition number of 1e12).
const RANK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Digital {
    Zf,
    Mmse,
}

impl std::str::FromStr for Digital {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zf" => Ok(Digital::Zf),
            "mmse" => Ok(Digital::Mmse),
            _ => Err(Error::Config(format!("unknown digital beamformer `{s}`"))),
        }
    }
}

impl std::fmt::Display for Digital {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Digital::Zf => "zf",
            Digital::Mmse => "mmse",
        })
    }
}

/// `H = [h_1 … h_K]`, N×K.
pub fn channel_matrix(channels: &[ChannelRealization]) -> CMatrix {
    let n = channels.first().map_or(0, |c| c.h.len());
    CMatrix::from_fn(n, channels.len(), |i, k| channels[k].h[i])
}

/// `F_RF` with one codeword per column.
pub fn analog_matrix(beams: &[Codeword]) -> CMatrix {
    let n = beams.first().map_or(0, Codeword::len);
    CMatrix::from_fn(n, beams.len(), |i, k| beams[k].weights()[i])
}

/// `G = Hᴴ F_RF`; row k is `g_kᴴ`.
pub fn effective_channels(h: &CMatrix, analog: &CMatrix) -> Result<CMatrix> {
    if h.nrows() != analog.nrows() {
        return Err(Error::Dimension { expected: analog.nrows(), got: h.nrows() });
    }
    Ok(h.adjoint() * analog)
}

/// Users spanning the numerical null space of the columns of `a`, or
/// `None` when `a` has full column rank.
fn null_space_members(a: &CMatrix) -> Option<Vec<usize>> {
    if a.ncols() == 0 {
        return None;
    }
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let zero: Vec<usize> = (0..a.ncols()).filter(|&j| norms[j] == 0.0).collect();
    if !zero.is_empty() {
        return Some(zero);
    }
    // scale columns so that weak users are not mistaken for collisions
    let mut scaled = a.clone();
    for (j, mut c) in scaled.column_iter_mut().enumerate() {
        c /= Complex64::from(norms[j]);
    }
    let svd = scaled.clone().svd(false, true);
    let s = &svd.singular_values;
    let (smax, smin, imin) = s.iter().enumerate().fold((0.0f64, f64::INFINITY, 0), |acc, (i, &x)| {
        (acc.0.max(x), if x < acc.1 { x } else { acc.1 }, if x < acc.1 { i } else { acc.2 })
    });
    if a.nrows() >= a.ncols() && smin > RANK_TOL * smax {
        return None;
    }
    let v_t = svd.v_t.expect("requested");
    if a.nrows() < a.ncols() {
        return Some((0..a.ncols()).collect());
    }
    let row = v_t.row(imin);
    Some((0..a.ncols()).filter(|&j| row[j].norm() > 1e-3).collect())
}

fn normalized(v: CVector) -> CVector {
    let n = v.norm();
    if n > 0.0 {
        v / Complex64::from(n)
    } else {
        v
    }
}

/// Zero-forcing digital precoder: column k is the projection of `g_k` onto
/// the orthogonal complement of the other users' effective channels,
/// normalised to unit norm.
pub fn zf_digital(effective: &CMatrix) -> Result<CMatrix> {
    let k_users = effective.nrows();
    if effective.ncols() != k_users {
        return Err(Error::Dimension { expected: k_users, got: effective.ncols() });
    }
    // columns g_k
    let g = effective.adjoint();
    if let Some(colliding) = null_space_members(&g) {
        return Err(Error::RankDeficient { user: colliding[0], colliding });
    }
    let mut out = CMatrix::zeros(k_users, k_users);
    for k in 0..k_users {
        let gk = g.column(k).into_owned();
        let others: Vec<usize> = (0..k_users).filter(|&i| i != k).collect();
        let f = if others.is_empty() {
            gk
        } else {
            let a = g.select_columns(&others);
            let gram = a.adjoint() * &a;
            let rhs = a.adjoint() * &gk;
            let coef = gram
                .full_piv_lu()
                .solve(&rhs)
                .ok_or_else(|| Error::RankDeficient { user: k, colliding: others.clone() })?;
            &gk - a * coef
        };
        out.set_column(k, &normalized(f));
    }
    Ok(out)
}

/// MMSE digital precoder: column k is `B_k⁻¹ g_k` normalised, with
/// `B_k = Σ_{i≠k} (P/(Kσ²)) g_i g_iᴴ + I`.
pub fn mmse_digital(effective: &CMatrix, tx_power: f64, noise_power: f64) -> Result<CMatrix> {
    let k = effective.nrows();
    mmse_digital_with_metric(effective, &CMatrix::identity(k, k), tx_power, noise_power)
}

/// MMSE precoder regularised by `metric` in place of `I`.
///
/// The per-user power is measured after the analog stage, `‖F_RF f‖²`, so
/// the matching regulariser is `F_RFᴴ F_RF`. It equals `I` for orthonormal
/// analog beams; near-field beams of nearby users are not orthogonal, and
/// there the identity form can lose to zero forcing.
pub fn mmse_digital_with_metric(
    effective: &CMatrix,
    metric: &CMatrix,
    tx_power: f64,
    noise_power: f64,
) -> Result<CMatrix> {
    let k_users = effective.nrows();
    if effective.ncols() != k_users {
        return Err(Error::Dimension { expected: k_users, got: effective.ncols() });
    }
    if metric.shape() != (k_users, k_users) {
        return Err(Error::Dimension { expected: k_users, got: metric.nrows() });
    }
    if !(noise_power > 0.0 && tx_power >= 0.0) {
        return Err(Error::Config(format!(
            "MMSE needs positive noise power and non-negative transmit power (P = {tx_power}, σ² = {noise_power})"
        )));
    }
    let g = effective.adjoint();
    let rho = Complex64::from(tx_power / (k_users as f64 * noise_power));
    let mut out = CMatrix::zeros(k_users, k_users);
    for k in 0..k_users {
        let mut b = metric.clone();
        for i in (0..k_users).filter(|&i| i != k) {
            let gi = g.column(i);
            b += gi * gi.adjoint() * rho;
        }
        let gk = g.column(k).into_owned();
        // a singular metric comes from repeated analog beams; its null space
        // is that of F_RF, so the min-norm solution gives the same beam
        let f = match b.clone().cholesky() {
            Some(ch) => ch.solve(&gk),
            None => {
                let svd = b.svd(true, true);
                let smax = svd.singular_values.max();
                svd.solve(&gk, 1e-12 * smax).map_err(|_| Error::RankDeficient { user: k, colliding: vec![k] })?
            }
        };
        out.set_column(k, &normalized(f));
    }
    Ok(out)
}

/// Digital stage on top of `analog`; MMSE uses the analog Gram matrix as
/// its regulariser.
pub fn digital_precoder(
    kind: Digital,
    effective: &CMatrix,
    analog: &CMatrix,
    tx_power: f64,
    noise_power: f64,
) -> Result<CMatrix> {
    match kind {
        Digital::Zf => zf_digital(effective),
        Digital::Mmse => mmse_digital_with_metric(effective, &(analog.adjoint() * analog), tx_power, noise_power),
    }
}

/// Analog and digital stages with per-user normalisation
/// `‖F_RF f_BB,k‖ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridBeamformer {
    analog: CMatrix,
    digital: CMatrix,
}

impl HybridBeamformer {
    /// Scales each digital column so that its overall beam has unit norm.
    /// Columns whose overall beam vanishes are left at zero.
    pub fn new(analog: CMatrix, mut digital: CMatrix) -> Result<Self> {
        if analog.ncols() != digital.nrows() {
            return Err(Error::Dimension { expected: analog.ncols(), got: digital.nrows() });
        }
        let overall = &analog * &digital;
        for (k, mut col) in digital.column_iter_mut().enumerate() {
            let n = overall.column(k).norm();
            if n > 0.0 {
                col /= Complex64::from(n);
            }
        }
        Ok(Self { analog, digital })
    }

    /// Builds the digital stage for `h` on top of `analog`.
    pub fn design(kind: Digital, h: &CMatrix, analog: CMatrix, tx_power: f64, noise_power: f64) -> Result<Self> {
        let g = effective_channels(h, &analog)?;
        let digital = digital_precoder(kind, &g, &analog, tx_power, noise_power)?;
        Self::new(analog, digital)
    }

    pub fn analog(&self) -> &CMatrix {
        &self.analog
    }

    pub fn digital(&self) -> &CMatrix {
        &self.digital
    }

    /// `F_RF·F_BB`, N×K.
    pub fn precoder(&self) -> CMatrix {
        &self.analog * &self.digital
    }

    pub fn users(&self) -> usize {
        self.digital.ncols()
    }
}

/// SINR-based rate of user `k` in bps/Hz with equal power `P/K` per stream.
pub fn user_rate(k: usize, h: &CMatrix, bf: &HybridBeamformer, tx_power: f64, noise_power: f64) -> Result<f64> {
    let users = bf.users();
    if k >= users || h.ncols() != users {
        return Err(Error::Dimension { expected: users, got: h.ncols().max(k + 1) });
    }
    let response = h.column(k).adjoint() * bf.precoder();
    let p = tx_power / users as f64;
    let signal = p * response[k].norm_sqr();
    let interference: f64 = (0..users).filter(|&i| i != k).map(|i| p * response[i].norm_sqr()).sum();
    Ok((1.0 + signal / (interference + noise_power)).log2())
}

pub fn sum_rate(h: &CMatrix, bf: &HybridBeamformer, tx_power: f64, noise_power: f64) -> Result<f64> {
    (0..bf.users()).map(|k| user_rate(k, h, bf, tx_power, noise_power)).sum()
}

/// Overhead factor `max(0, 1 − T_p·t_sym/T_frame)`.
pub fn overhead_factor(pilots_used: usize, symbol_time: f64, frame_time: f64) -> f64 {
    let used = pilots_used as f64 * symbol_time / frame_time;
    if used >= 1.0 - 1e-12 {
        log::debug!("{pilots_used} pilots fill the whole {frame_time} s frame");
        return 0.0;
    }
    1.0 - used
}

/// Sum rate discounted by the share of the frame spent on pilots.
pub fn effective_rate(sum_rate: f64, pilots_used: usize, symbol_time: f64, frame_time: f64) -> f64 {
    overhead_factor(pilots_used, symbol_time, frame_time) * sum_rate
}
