//! Secret-key-rate generation models `G(A)`.
//!
//! A QKD module pair produces secret key at a rate that decays with the
//! optical attenuation `A` (dB) of the fiber between them. Two model kinds
//! are supported:
//!
//! * a parametric asymptotic decoy-state BB84 rate, and
//! * a table fit of measured `(attenuation, rate)` points, interpolated
//!   log-linearly (measured rates decay exponentially with dB, so linear
//!   interpolation of the raw rate would systematically overestimate).
//!
//! Commercial receivers saturate at low loss: received power above the
//! maximum acceptable level `R_A` requires adding attenuators, so the
//! effective curve is flat below the saturation attenuation
//! `A_sat = tx_power - R_A`. The same clamp reproduces the flat region of
//! length `K = A_sat / a_c` km seen on measured rate-vs-distance plots.
//!
//! Switched-network paths pay two penalties on top of the base model: an
//! extra optical loss `O` dB from the switches (added to the attenuation)
//! and a pairing penalty `P` dB (scaling the output by `10^(-P/10)`) for
//! running unmatched transmitter/receiver combinations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary entropy in bits, with the usual convention H2(0) = H2(1) = 0.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if x.is_nan() || !(0.0..=1.0).contains(&x) {
        return Err(Error::ProbabilityRange(x));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Parameters of the asymptotic decoy-state BB84 rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoyParams {
    /// Pulse repetition rate in pulses per second.
    pub clock_rate_hz: f64,
    /// Mean photon number of the signal states.
    pub mean_photon_number: f64,
    /// Overall detection efficiency at the receiver (probability).
    pub detector_efficiency: f64,
    /// Dark count yield Y0 (probability per pulse).
    pub dark_count_yield: f64,
    /// Misalignment error probability.
    pub misalignment_error: f64,
    /// Error-correction inefficiency relative to the Shannon limit (>= 1).
    pub error_correction_inefficiency: f64,
    /// Basis sifting factor in (0, 1].
    pub sifting_factor: f64,
}

impl DecoyParams {
    pub fn validate(&self) -> Result<()> {
        if self.clock_rate_hz.is_nan() || self.clock_rate_hz <= 0.0 {
            return Err(Error::NonPositive { name: "clock_rate_hz", value: self.clock_rate_hz });
        }
        if self.mean_photon_number.is_nan() || self.mean_photon_number <= 0.0 {
            return Err(Error::NonPositive {
                name: "mean_photon_number",
                value: self.mean_photon_number,
            });
        }
        for (name, p) in [
            ("detector_efficiency", self.detector_efficiency),
            ("dark_count_yield", self.dark_count_yield),
            ("misalignment_error", self.misalignment_error),
        ] {
            if p.is_nan() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{p} is not a probability"),
                });
            }
        }
        if self.error_correction_inefficiency.is_nan() || self.error_correction_inefficiency < 1.0 {
            return Err(Error::InvalidParameter {
                name: "error_correction_inefficiency",
                reason: format!("{} < 1", self.error_correction_inefficiency),
            });
        }
        if self.sifting_factor.is_nan() || self.sifting_factor <= 0.0 || self.sifting_factor > 1.0
        {
            return Err(Error::InvalidParameter {
                name: "sifting_factor",
                reason: format!("{} not in (0, 1]", self.sifting_factor),
            });
        }
        Ok(())
    }
}

impl Default for DecoyParams {
    /// Reference parameters for a GHz-clocked telecom decoy-state system.
    ///
    /// The detection efficiency is an effective end-to-end figure (detector
    /// quantum efficiency together with receiver insertion loss and gating
    /// duty cycle); with these values the 6 dB rate lands in the
    /// few-hundred-kbps range observed on commercial phase-encoding
    /// hardware at that attenuation.
    fn default() -> Self {
        Self {
            clock_rate_hz: 1.0e9,
            mean_photon_number: 0.5,
            detector_efficiency: 0.05,
            dark_count_yield: 1.7e-6,
            misalignment_error: 0.033,
            error_correction_inefficiency: 1.16,
            sifting_factor: 0.5,
        }
    }
}

/// Asymptotic decoy-state BB84 secret key rate in bits/s at attenuation `a_db`.
///
/// Negative per-pulse rates clamp to zero: that is the natural link-budget
/// cutoff, not an error.
pub fn decoy_skr(params: &DecoyParams, a_db: f64) -> f64 {
    let eta = params.detector_efficiency * 10f64.powf(-a_db / 10.0);
    let mu = params.mean_photon_number;
    let y0 = params.dark_count_yield;
    let e_det = params.misalignment_error;

    // Overall gain and QBER of the signal states.
    let gain_mu = y0 + 1.0 - (-mu * eta).exp();
    if gain_mu <= 0.0 {
        return 0.0;
    }
    let err_mu = (0.5 * y0 + e_det * (1.0 - (-mu * eta).exp())) / gain_mu;

    // Single-photon yield, gain and error rate.
    let y1 = y0 + eta - y0 * eta;
    if y1 <= 0.0 {
        return 0.0;
    }
    let gain_1 = y1 * mu * (-mu).exp();
    let err_1 = (0.5 * y0 + e_det * eta) / y1;

    let h_err_1 = binary_entropy(err_1.min(1.0)).unwrap_or(1.0);
    let h_err_mu = binary_entropy(err_mu.min(1.0)).unwrap_or(1.0);

    let per_pulse = params.sifting_factor
        * (gain_1 * (1.0 - h_err_1) - params.error_correction_inefficiency * gain_mu * h_err_mu);
    params.clock_rate_hz * per_pulse.max(0.0)
}

/// Receiver saturation, modeled as attenuation clamping.
///
/// Received power above `max_rx_power_dbm` must be brought down with
/// attenuators, so every evaluation below `sat_attenuation_db` behaves as
/// if the missing attenuation had been inserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationClamp {
    pub tx_power_dbm: f64,
    pub max_rx_power_dbm: f64,
}

impl SaturationClamp {
    pub fn new(tx_power_dbm: f64, max_rx_power_dbm: f64) -> Result<Self> {
        let clamp = Self { tx_power_dbm, max_rx_power_dbm };
        clamp.validate()?;
        Ok(clamp)
    }

    pub fn validate(&self) -> Result<()> {
        let sat = self.sat_attenuation_db();
        if sat.is_nan() || sat < 0.0 {
            return Err(Error::InvalidParameter {
                name: "saturation clamp",
                reason: format!(
                    "tx power {} dBm below max rx power {} dBm",
                    self.tx_power_dbm, self.max_rx_power_dbm
                ),
            });
        }
        Ok(())
    }

    /// Attenuation below which the receiver saturates: `tx - R_A`.
    pub fn sat_attenuation_db(&self) -> f64 {
        self.tx_power_dbm - self.max_rx_power_dbm
    }

    /// Length of the flat rate-vs-distance region for a fiber with
    /// attenuation coefficient `a_c` dB/km.
    pub fn flat_region_km(&self, attenuation_db_per_km: f64) -> f64 {
        self.sat_attenuation_db() / attenuation_db_per_km
    }
}

impl Default for SaturationClamp {
    /// 0 dBm transmitter, -6 dBm maximum acceptable received power.
    fn default() -> Self {
        Self { tx_power_dbm: 0.0, max_rx_power_dbm: -6.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ModelKind {
    Parametric(DecoyParams),
    /// Knots sorted by strictly increasing attenuation, rates non-increasing.
    Table(Vec<(f64, f64)>),
}

/// An evaluable rate-vs-attenuation function with saturation clamp and
/// optional switched-path penalties baked in.
///
/// Models are immutable after construction; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationModel {
    kind: ModelKind,
    clamp: SaturationClamp,
    /// Extra attenuation added before the clamp (switch loss O).
    attenuation_offset_db: f64,
    /// Output multiplier (pairing penalty 10^(-P/10)).
    output_scale: f64,
}

impl GenerationModel {
    pub fn parametric(params: DecoyParams, clamp: SaturationClamp) -> Result<Self> {
        params.validate()?;
        clamp.validate()?;
        Ok(Self {
            kind: ModelKind::Parametric(params),
            clamp,
            attenuation_offset_db: 0.0,
            output_scale: 1.0,
        })
    }

    /// Builds a table model from measured `(attenuation_db, skr_bps)` points.
    ///
    /// Requires at least two knots with strictly increasing attenuations and
    /// non-negative, non-increasing rates. Evaluation is flat below the
    /// first knot, log-linear between knots and zero beyond the last one.
    pub fn from_table(points: Vec<(f64, f64)>, clamp: SaturationClamp) -> Result<Self> {
        clamp.validate()?;
        if points.len() < 2 {
            return Err(Error::BadTable(format!("need at least 2 points, got {}", points.len())));
        }
        for window in points.windows(2) {
            let (a0, r0) = window[0];
            let (a1, r1) = window[1];
            if a1.is_nan() || a1 <= a0 {
                return Err(Error::BadTable(format!(
                    "attenuations must be strictly increasing ({a0} then {a1})"
                )));
            }
            if r1 > r0 {
                return Err(Error::BadTable(format!(
                    "rates must be non-increasing ({r0} bps at {a0} dB, {r1} bps at {a1} dB)"
                )));
            }
        }
        for &(a, r) in &points {
            if a.is_nan() || r.is_nan() || r < 0.0 {
                return Err(Error::BadTable(format!("bad knot ({a}, {r})")));
            }
        }
        Ok(Self {
            kind: ModelKind::Table(points),
            clamp,
            attenuation_offset_db: 0.0,
            output_scale: 1.0,
        })
    }

    /// The calibrated reference model: default decoy parameters behind the
    /// default 6 dB saturation clamp.
    pub fn reference() -> Self {
        Self::parametric(DecoyParams::default(), SaturationClamp::default())
            .expect("reference parameters are valid")
    }

    pub fn clamp(&self) -> &SaturationClamp {
        &self.clamp
    }

    pub fn output_scale(&self) -> f64 {
        self.output_scale
    }

    /// Generation rate in bits/s at attenuation `a_db`.
    ///
    /// Evaluates the underlying curve at
    /// `max(a_db + attenuation_offset, A_sat)` and applies the output scale.
    pub fn rate_bps(&self, a_db: f64) -> f64 {
        let a_eff = (a_db + self.attenuation_offset_db).max(self.clamp.sat_attenuation_db());
        self.output_scale * self.eval_raw(a_eff)
    }

    /// Returns a model whose evaluation at `A` equals
    /// `self.rate_bps(A + switch_loss_db) * 10^(-pairing_penalty_db / 10)`.
    ///
    /// Penalties compose additively: applying (O1, P1) then (O2, P2) is the
    /// same transform as (O1 + O2, P1 + P2). A negative penalty models an
    /// unmatched pairing that happens to outperform the matched one.
    pub fn with_switched_penalties(&self, switch_loss_db: f64, pairing_penalty_db: f64) -> Self {
        let mut out = self.clone();
        out.attenuation_offset_db += switch_loss_db;
        out.output_scale *= 10f64.powf(-pairing_penalty_db / 10.0);
        out
    }

    fn eval_raw(&self, a_db: f64) -> f64 {
        match &self.kind {
            ModelKind::Parametric(params) => decoy_skr(params, a_db),
            ModelKind::Table(points) => eval_table(points, a_db),
        }
    }
}

fn eval_table(points: &[(f64, f64)], a_db: f64) -> f64 {
    let (first_a, first_r) = points[0];
    if a_db <= first_a {
        return first_r;
    }
    let (last_a, last_r) = *points.last().expect("table has knots");
    if a_db > last_a {
        return 0.0;
    }
    if a_db == last_a {
        return last_r;
    }
    let idx = points.partition_point(|&(a, _)| a < a_db);
    let (a0, r0) = points[idx - 1];
    let (a1, r1) = points[idx];
    if a_db == a0 {
        return r0;
    }
    // Log-linear in rate: straight line in log10(SKR) over dB.
    if r1 <= 0.0 || r0 <= 0.0 {
        // A zero knot means the budget ends inside this segment; there is no
        // exponential decay toward exactly zero, so report zero past the
        // last positive knot.
        return 0.0;
    }
    if r0 == r1 {
        return r0; // flat segment, keep it exact
    }
    let t = (a_db - a0) / (a1 - a0);
    10f64.powf(r0.log10() + t * (r1.log10() - r0.log10()))
}

/// Converts a matched/unmatched rate pair into a pairing penalty in dB.
///
/// Positive when the unmatched pair is slower. Antisymmetric:
/// swapping the arguments flips the sign.
pub fn pairing_penalty_db(matched_bps: f64, unmatched_bps: f64) -> Result<f64> {
    if matched_bps.is_nan() || matched_bps <= 0.0 {
        return Err(Error::NonPositive { name: "matched_bps", value: matched_bps });
    }
    if unmatched_bps.is_nan() || unmatched_bps <= 0.0 {
        return Err(Error::NonPositive { name: "unmatched_bps", value: unmatched_bps });
    }
    Ok(-10.0 * (unmatched_bps / matched_bps).log10())
}

/// Parses a two-column `attenuation_db,skr_bps` CSV (header required) into
/// table knots.
pub fn parse_table_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "attenuation_db,skr_bps" => {}
        other => {
            return Err(Error::BadTable(format!(
                "expected header 'attenuation_db,skr_bps', got {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut points = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (a, r) = match (cols.next(), cols.next(), cols.next()) {
            (Some(a), Some(r), None) => (a.trim(), r.trim()),
            _ => {
                return Err(Error::BadTable(format!("line {}: expected 2 columns", lineno + 2)))
            }
        };
        let a: f64 = a
            .parse()
            .map_err(|_| Error::BadTable(format!("line {}: bad attenuation {a:?}", lineno + 2)))?;
        let r: f64 = r
            .parse()
            .map_err(|_| Error::BadTable(format!("line {}: bad rate {r:?}", lineno + 2)))?;
        points.push((a, r));
    }
    Ok(points)
}
