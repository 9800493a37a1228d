//! Relative-gain metric and the (N, Le) sweep engine.
//!
//! The two architectures are compared through the relative consumption
//! gain `f = 100 * (C_S - C_R) / max(C_S, C_R)`, a symmetric percentage in
//! [-100, 100]: positive means switched delivers more key to every pair.
//! Absolute rates cancel, so `f` depends only on the shape of the
//! generation curve, the ring geometry and the switched penalties.
//!
//! Sweep cells are pure and independent; the grid is identical no matter
//! in which order cells are evaluated. A switched configuration whose
//! longest chord exceeds the link budget scores `f = -100` with a tag
//! instead of aborting the sweep.

use crate::error::{Error, Result};
use crate::ring::{ChordMode, RingScenario};
use crate::skr::GenerationModel;
use crate::switched::{self, SwitchedConfig};
use crate::relayed;

/// Relative consumption gain of switched over relayed, in percent.
///
/// Zero when both rates are zero (two dead networks tie).
pub fn relative_gain_percent(switched_bps: f64, relayed_bps: f64) -> Result<f64> {
    for (name, value) in [("switched_bps", switched_bps), ("relayed_bps", relayed_bps)] {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("{value} is not a non-negative rate"),
            });
        }
    }
    let max = switched_bps.max(relayed_bps);
    if max == 0.0 {
        return Ok(0.0);
    }
    Ok(100.0 * (switched_bps - relayed_bps) / max)
}

/// Axes and fixed parameters of a comparison sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Node counts, odd, in row order.
    pub node_counts: Vec<usize>,
    /// Adjacent link lengths in km, in column order.
    pub link_lengths_km: Vec<f64>,
    pub switched: SwitchedConfig,
    pub model: GenerationModel,
    pub attenuation_db_per_km: f64,
    pub chord_mode: ChordMode,
}

/// Why a cell's switched rate is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellTag {
    /// Some chord exceeds the link budget; `hop` names the first one.
    OutOfBudget { hop: usize },
    /// Reconfiguration gaps consume the whole period.
    InfeasibleSchedule,
}

impl CellTag {
    pub fn label(&self) -> String {
        match self {
            CellTag::OutOfBudget { hop } => format!("out_of_budget_hop_{hop}"),
            CellTag::InfeasibleSchedule => "infeasible_schedule".to_string(),
        }
    }
}

/// One evaluated (N, Le) point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub node_count: usize,
    pub le_km: f64,
    pub relayed_bps: f64,
    pub switched_bps: f64,
    pub gain_percent: f64,
    pub tag: Option<CellTag>,
}

/// Evaluates the full grid, row-major over `node_counts` then
/// `link_lengths_km`.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepCell>> {
    spec.switched.validate()?;
    if spec.node_counts.is_empty() || spec.link_lengths_km.is_empty() {
        return Err(Error::InvalidParameter {
            name: "sweep axes",
            reason: "node_counts and link_lengths_km must be non-empty".into(),
        });
    }
    let mut cells = Vec::with_capacity(spec.node_counts.len() * spec.link_lengths_km.len());
    for &n in &spec.node_counts {
        for &le in &spec.link_lengths_km {
            cells.push(evaluate_cell(spec, n, le)?);
        }
    }
    Ok(cells)
}

/// Evaluates a single grid point; the sweep is just this in a loop, which
/// keeps per-cell results order-independent by construction.
pub fn evaluate_cell(spec: &SweepSpec, node_count: usize, le_km: f64) -> Result<SweepCell> {
    let scenario =
        RingScenario::new(node_count, le_km, spec.attenuation_db_per_km, spec.chord_mode)?;
    let relayed_bps = relayed::consumption_bps(&scenario, &spec.model);
    let (switched_bps, tag) =
        match switched::consumption_bps(&scenario, &spec.model, &spec.switched) {
            Ok(rate) => (rate, None),
            Err(Error::OutOfBudget { hop, .. }) => (0.0, Some(CellTag::OutOfBudget { hop })),
            Err(Error::InfeasibleSchedule { .. }) => (0.0, Some(CellTag::InfeasibleSchedule)),
            Err(other) => return Err(other),
        };
    let gain_percent = relative_gain_percent(switched_bps, relayed_bps)?;
    Ok(SweepCell { node_count, le_km, relayed_bps, switched_bps, gain_percent, tag })
}

/// Renders the grid as CSV with the fixed header
/// `N,Le_km,C_R_bps,C_S_bps,f_percent,tag`.
pub fn grid_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("N,Le_km,C_R_bps,C_S_bps,f_percent,tag\n");
    for cell in cells {
        let tag = cell.tag.as_ref().map(CellTag::label).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell.node_count, cell.le_km, cell.relayed_bps, cell.switched_bps, cell.gain_percent, tag
        ));
    }
    out
}

/// Renders the grid as an SVG heatmap colored by `f` on a diverging scale
/// pinned at -100 (blue) through 0 (white) to +100 (red).
pub fn heatmap_svg(cells: &[SweepCell], spec: &SweepSpec) -> String {
    const CELL: f64 = 42.0;
    const MARGIN_LEFT: f64 = 70.0;
    const MARGIN_TOP: f64 = 40.0;
    const MARGIN_BOTTOM: f64 = 50.0;

    let cols = spec.link_lengths_km.len();
    let rows = spec.node_counts.len();
    let width = MARGIN_LEFT + cols as f64 * CELL + 20.0;
    let height = MARGIN_TOP + rows as f64 * CELL + MARGIN_BOTTOM;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\">\
         switched vs relayed consumption gain f (%)</text>\n",
        MARGIN_LEFT
    ));

    for cell in cells {
        let row = spec
            .node_counts
            .iter()
            .position(|&n| n == cell.node_count)
            .expect("cell node count on axis");
        let col = spec
            .link_lengths_km
            .iter()
            .position(|&le| le == cell.le_km)
            .expect("cell link length on axis");
        let x = MARGIN_LEFT + col as f64 * CELL;
        let y = MARGIN_TOP + row as f64 * CELL;
        let (r, g, b) = diverging_color(cell.gain_percent);
        svg.push_str(&format!(
            "  <rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" \
             fill=\"rgb({r},{g},{b})\" stroke=\"#777\" stroke-width=\"0.5\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"9\" \
             text-anchor=\"middle\">{:.0}</text>\n",
            x + CELL / 2.0,
            y + CELL / 2.0 + 3.0,
            cell.gain_percent
        ));
    }

    for (row, n) in spec.node_counts.iter().enumerate() {
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">N={n}</text>\n",
            MARGIN_LEFT - 8.0,
            MARGIN_TOP + row as f64 * CELL + CELL / 2.0 + 4.0
        ));
    }
    for (col, le) in spec.link_lengths_km.iter().enumerate() {
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{le}</text>\n",
            MARGIN_LEFT + col as f64 * CELL + CELL / 2.0,
            MARGIN_TOP + rows as f64 * CELL + 16.0
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
         text-anchor=\"middle\">adjacent link length Le (km)</text>\n",
        MARGIN_LEFT + cols as f64 * CELL / 2.0,
        MARGIN_TOP + rows as f64 * CELL + 36.0
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Blue (-100) to white (0) to red (+100).
fn diverging_color(f: f64) -> (u8, u8, u8) {
    let f = f.clamp(-100.0, 100.0);
    let blend = |from: f64, to: f64, t: f64| (from + (to - from) * t).round() as u8;
    if f < 0.0 {
        let t = 1.0 + f / 100.0; // 0 at -100, 1 at 0
        (blend(33.0, 255.0, t), blend(102.0, 255.0, t), blend(172.0, 255.0, t))
    } else {
        let t = f / 100.0;
        (blend(255.0, 178.0, t), blend(255.0, 24.0, t), blend(255.0, 43.0, t))
    }
}
