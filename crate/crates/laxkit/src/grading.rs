//! Summary of one grading for the `grading` subcommand.

use laxkit_core::liealg::{self, Family};
use serde_json::json;

use crate::report::{Check, Report};
use crate::LaxkitError;

#[derive(Clone, Debug, PartialEq)]
pub struct GradingSummary {
    pub family: Family,
    pub rank: usize,
    pub root: usize,
    pub dual: bool,
    pub depth: i64,
    pub dim: usize,
    /// `dim g_p` for `p = −k..=k`.
    pub dims: Vec<usize>,
    pub mist_residual: i64,
}

pub fn summarize(family: Family, rank: usize, root: usize, dual: bool) -> Result<GradingSummary, LaxkitError> {
    let dec = liealg::grading(family, rank, root, dual).map_err(|e| LaxkitError::Usage(e.to_string()))?;
    let k = dec.k();
    Ok(GradingSummary {
        family,
        rank,
        root,
        dual,
        depth: k,
        dim: dec.dim(),
        dims: (-k..=k).map(|p| dec.dim_g(p)).collect(),
        mist_residual: liealg::check_mist_identity(&dec),
    })
}

impl GradingSummary {
    pub fn text(&self) -> String {
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        format!(
            "grading {} by alpha_{}{}\ndepth k = {}\ndim g = {}\ndim g_p, p = {}..{}: ({})\nmist residual = {}\n",
            self.label(),
            self.root,
            if self.dual { " (dual)" } else { "" },
            self.depth,
            self.dim,
            -self.depth,
            self.depth,
            dims.join(","),
            self.mist_residual
        )
    }

    /// `A3`, `C2`, plain `G2`.
    pub fn label(&self) -> String {
        match self.family {
            Family::G2 => "G2".into(),
            f => format!("{f}{}", self.rank),
        }
    }

    pub fn report(&self, seed: u64) -> Report {
        let sum = self.dims.iter().sum::<usize>();
        let checks = vec![Check::new("graded dimensions sum to dim g", sum == self.dim, 1)];
        Report::new("grading", seed, checks)
            .with("family", json!(self.family.to_string()))
            .with("rank", json!(self.rank))
            .with("root", json!(self.root))
            .with("dual", json!(self.dual))
            .with("depth", json!(self.depth))
            .with("dim", json!(self.dim))
            .with("dims", json!(self.dims))
            .with("mist_residual", json!(self.mist_residual))
    }
}
