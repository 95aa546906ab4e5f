//! Rendering of command results as JSON, CSV or human-readable text.

use std::io::{self, Write};

use serde::Serialize;

use superpose_core::bounds::{BoundReport, LowerBoundForm};
use superpose_core::harness::{CampaignSummary, ReplayOutcome, SweepTable};

type Out<'a> = &'a mut Vec<u8>;

/// A result printable in every output format.
pub trait Emit {
    fn json(&self, out: Out) -> io::Result<()>;
    fn csv(&self, out: Out) -> io::Result<()>;
    fn text(&self, out: Out) -> io::Result<()>;
}

/// `x` with 7 significant digits, in scientific notation outside `[1e-4, 1e7)`.
pub fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..7).contains(&magnitude) {
        return format!("{x:.6e}");
    }
    let decimals = (6 - magnitude) as usize;
    format!("{x:.decimals$}")
}

fn opt_sig(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), sig)
}

fn pretty_json<T: Serialize>(value: &T, out: Out) -> io::Result<()> {
    serde_json::to_writer_pretty(out, value).map_err(io::Error::other)
}

fn csv_rows<T: Serialize>(rows: impl IntoIterator<Item = T>, out: Out) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(io::Error::other)?;
    }
    w.flush()
}

#[derive(Serialize)]
pub struct ConcurrenceOut {
    pub concurrence: f64,
}

impl Emit for ConcurrenceOut {
    fn json(&self, out: Out) -> io::Result<()> {
        serde_json::to_writer(out, self).map_err(io::Error::other)
    }

    fn csv(&self, out: Out) -> io::Result<()> {
        csv_rows([self], out)
    }

    fn text(&self, out: Out) -> io::Result<()> {
        writeln!(out, "C = {}", sig(self.concurrence))
    }
}

/// Flat CSV view of a [`BoundReport`].
#[derive(Serialize)]
struct BoundRow {
    theorem: String,
    alpha_sq: f64,
    actual: f64,
    lower_psi: f64,
    lower_phi: f64,
    lower_comb: f64,
    lower_sym: f64,
    upper_psi: f64,
    upper_phi: f64,
    upper_comb: f64,
    upper_sym: f64,
    rank_r: usize,
    norm_sq: f64,
    condition: Option<bool>,
    premise_residual: f64,
    lower_form: LowerBoundForm,
}

impl Emit for BoundReport {
    fn json(&self, out: Out) -> io::Result<()> {
        pretty_json(self, out)
    }

    fn csv(&self, out: Out) -> io::Result<()> {
        csv_rows(
            [BoundRow {
                theorem: self.theorem.to_string(),
                alpha_sq: self.alpha_sq,
                actual: self.actual_concurrence,
                lower_psi: self.lower_individual[0],
                lower_phi: self.lower_individual[1],
                lower_comb: self.lower_combined,
                lower_sym: self.lower_symmetric,
                upper_psi: self.upper_individual[0],
                upper_phi: self.upper_individual[1],
                upper_comb: self.upper_combined,
                upper_sym: self.upper_symmetric,
                rank_r: self.rank_r,
                norm_sq: self.norm_sq,
                condition: self.condition_flag,
                premise_residual: self.premise_residual,
                lower_form: self.lower_form,
            }],
            out,
        )
    }

    fn text(&self, out: Out) -> io::Result<()> {
        writeln!(out, "theorem   {}", self.theorem)?;
        writeln!(out, "|alpha|^2 {}", sig(self.alpha_sq))?;
        writeln!(
            out,
            "lower     {} (symmetric {}; Psi {}, Phi {})",
            sig(self.lower_combined),
            sig(self.lower_symmetric),
            sig(self.lower_individual[0]),
            sig(self.lower_individual[1])
        )?;
        writeln!(out, "actual    {}", sig(self.actual_concurrence))?;
        writeln!(
            out,
            "upper     {} (symmetric {}; Psi {}, Phi {})",
            sig(self.upper_combined),
            sig(self.upper_symmetric),
            sig(self.upper_individual[0]),
            sig(self.upper_individual[1])
        )?;
        writeln!(out, "rank r    {}", self.rank_r)?;
        writeln!(out, "norm^2    {}", sig(self.norm_sq))?;
        if let Some(flag) = self.condition_flag {
            writeln!(out, "condition {flag}")?;
        }
        if let Some(w) = &self.premise_warning {
            writeln!(out, "warning   {w}")?;
        }
        Ok(())
    }
}

impl Emit for CampaignSummary {
    fn json(&self, out: Out) -> io::Result<()> {
        pretty_json(self, out)
    }

    fn csv(&self, out: Out) -> io::Result<()> {
        csv_rows([self], out)
    }

    fn text(&self, out: Out) -> io::Result<()> {
        writeln!(out, "campaign            {}", self.kind)?;
        writeln!(
            out,
            "trials              {} ({} evaluated, {} degenerate)",
            self.total, self.evaluated, self.skipped_degenerate
        )?;
        writeln!(out, "tolerance           {:e}", self.tolerance)?;
        write!(out, "violations          {}", self.violations)?;
        if let (Some(first), Some(margin)) = (self.first_violation_trial, self.max_violation_margin)
        {
            write!(
                out,
                " (first at trial {first}, worst margin {})",
                sig(margin)
            )?;
        }
        writeln!(out)?;
        if self.max_weyl_margin.is_some() {
            return writeln!(out, "max Weyl margin     {}", opt_sig(self.max_weyl_margin));
        }
        writeln!(
            out,
            "lower gap           max {} mean {}",
            opt_sig(self.max_lower_gap),
            opt_sig(self.mean_lower_gap)
        )?;
        writeln!(
            out,
            "upper gap           min {} mean {}",
            opt_sig(self.min_upper_gap),
            opt_sig(self.mean_upper_gap)
        )?;
        writeln!(out, "nonzero lower       {}", self.nonzero_lower_count)?;
        writeln!(out, "condition true      {}", self.condition_true_count)?;
        writeln!(
            out,
            "condition failures  {}",
            self.condition_consistency_failures
        )
    }
}

impl Emit for SweepTable {
    fn json(&self, out: Out) -> io::Result<()> {
        pretty_json(self, out)
    }

    fn csv(&self, out: Out) -> io::Result<()> {
        csv_rows(&self.rows, out)
    }

    fn text(&self, out: Out) -> io::Result<()> {
        writeln!(out, "theorem {}", self.theorem)?;
        writeln!(
            out,
            "{:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            "alpha_sq", "lower_sym", "lower", "actual", "upper", "upper_sym"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
                sig(r.alpha_sq),
                sig(r.lower_symmetric),
                sig(r.lower_combined),
                sig(r.actual),
                sig(r.upper_combined),
                sig(r.upper_symmetric)
            )?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
pub struct ReplayOut {
    pub tolerance: f64,
    /// Absent when the states are not trace-orthogonal.
    pub t2: Option<ReplayOutcome>,
    pub t3: ReplayOutcome,
}

impl ReplayOut {
    pub fn ok(&self) -> bool {
        self.t3.ok() && self.t2.as_ref().is_none_or(ReplayOutcome::ok)
    }
}

#[derive(Serialize)]
struct ReplayRow {
    replay: &'static str,
    status: &'static str,
    identity_residual: Option<f64>,
    unweighted_identity_residual: Option<f64>,
    max_eigen_excess: Option<f64>,
}

fn replay_row(name: &'static str, o: &ReplayOutcome) -> ReplayRow {
    match o {
        ReplayOutcome::Checked(r) => ReplayRow {
            replay: name,
            status: if r.passed { "pass" } else { "fail" },
            identity_residual: Some(r.identity_residual),
            unweighted_identity_residual: r.unweighted_identity_residual,
            max_eigen_excess: Some(r.max_eigen_excess),
        },
        ReplayOutcome::DegenerateSkip => ReplayRow {
            replay: name,
            status: "degenerate",
            identity_residual: None,
            unweighted_identity_residual: None,
            max_eigen_excess: None,
        },
    }
}

impl ReplayOut {
    fn rows(&self) -> Vec<ReplayRow> {
        let mut rows: Vec<_> = self.t2.iter().map(|o| replay_row("T2", o)).collect();
        rows.push(replay_row("T3", &self.t3));
        rows
    }
}

impl Emit for ReplayOut {
    fn json(&self, out: Out) -> io::Result<()> {
        pretty_json(self, out)
    }

    fn csv(&self, out: Out) -> io::Result<()> {
        csv_rows(self.rows(), out)
    }

    fn text(&self, out: Out) -> io::Result<()> {
        for r in self.rows() {
            write!(out, "{} {}", r.replay, r.status)?;
            if let (Some(id), Some(ex)) = (r.identity_residual, r.max_eigen_excess) {
                write!(
                    out,
                    ": identity residual {id:.3e}, eigenvalue excess {ex:.3e}"
                )?;
            }
            if let Some(u) = r.unweighted_identity_residual {
                write!(out, " (unweighted form: {u:.3e})")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
