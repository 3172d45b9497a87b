//! Graph acquisition: load a persisted file, or build from a flow
//! specification (with an optional cache directory from `CHAINSCOPE_CACHE`).

use chainscope::error::{Error, Result};
use chainscope::flow::VectorField;
use chainscope::storage;
use chainscope::transition::{build_transition_graph, refine, BuildParams, TransitionGraph};
use clap::Args;
use serde_json::json;
use std::path::PathBuf;

#[derive(Args)]
pub struct GraphSource {
    /// path to a persisted graph file
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// flow spec: `linear:<slopes>`, `circleslow`, `figure1`, `expr:<json>`
    #[arg(long)]
    pub flow: Option<String>,
    /// grid resolution per axis
    #[arg(long)]
    pub n: Option<u32>,
    /// flow time per edge
    #[arg(long)]
    pub t: Option<f64>,
    /// jump radius (default: one box side)
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// integration step (default: t/64)
    #[arg(long)]
    pub step: Option<f64>,
    /// sample points per box (default: center plus corners)
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn parse_flow(spec: &str) -> Result<VectorField> {
    if let Some(rest) = spec.strip_prefix("linear:") {
        let slope = rest
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad slope entry {x:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        return VectorField::linear(slope);
    }
    if let Some(path) = spec.strip_prefix("expr:") {
        let text = std::fs::read_to_string(path)?;
        return VectorField::from_expression_json(&text);
    }
    match spec {
        "circleslow" => Ok(VectorField::circle_slow()),
        "figure1" => Ok(VectorField::figure_one()),
        other => Err(Error::Parse(format!(
            "unknown flow spec {other:?}: expected linear:<slopes>, circleslow, figure1 or expr:<file>"
        ))),
    }
}

impl GraphSource {
    pub fn field(&self) -> Result<Option<VectorField>> {
        self.flow.as_deref().map(parse_flow).transpose()
    }

    fn params(&self, field: &VectorField) -> Result<BuildParams> {
        let n = self
            .n
            .ok_or_else(|| Error::InvalidParameter("--n is required to build".into()))?;
        let mut params = BuildParams::new(n, field.dimension());
        if let Some(t) = self.t {
            params = params.with_t(t);
        }
        if let Some(eps) = self.epsilon {
            params = params.with_epsilon(eps);
        }
        if let Some(step) = self.step {
            params = params.with_step(step);
        }
        if let Some(samples) = self.samples {
            params = params.with_samples(samples);
        }
        Ok(params)
    }

    pub fn build(&self) -> Result<TransitionGraph> {
        let field = self
            .field()?
            .ok_or_else(|| Error::InvalidParameter("--flow is required to build".into()))?;
        let params = self.params(&field)?;
        build_transition_graph(&field, &params)
    }

    pub fn build_refined(&self) -> Result<TransitionGraph> {
        let field = self
            .field()?
            .ok_or_else(|| Error::InvalidParameter("--flow is required to refine".into()))?;
        let params = self.params(&field)?;
        refine(&field, &params)
    }

    /// Load from `--graph`, or build from `--flow` (through the cache when
    /// `CHAINSCOPE_CACHE` is set).
    pub fn load(&self) -> Result<TransitionGraph> {
        if let Some(path) = &self.graph {
            return storage::load(path);
        }
        if self.flow.is_none() {
            return Err(Error::InvalidParameter(
                "either --graph or --flow/--n must be given".into(),
            ));
        }
        if let Ok(cache) = std::env::var("CHAINSCOPE_CACHE") {
            let field = self.field()?.expect("checked above");
            let params = self.params(&field)?;
            let key = cache_key(&field, &params);
            let path = PathBuf::from(cache).join(key);
            if path.exists() {
                let tg = storage::load(&path)?;
                if tg.fingerprint_matches(&field) {
                    return Ok(tg);
                }
                eprintln!("warning: cached graph fingerprint mismatch, rebuilding");
            }
            let tg = build_transition_graph(&field, &params)?;
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            storage::save(&tg, &path)?;
            return Ok(tg);
        }
        self.build()
    }

    pub fn echo(&self) -> serde_json::Value {
        json!({
            "graph": self.graph.as_ref().map(|p| p.display().to_string()),
            "flow": self.flow,
            "n": self.n,
            "t": self.t,
            "epsilon": self.epsilon,
            "step": self.step,
            "samples": self.samples,
        })
    }

    pub fn echo_with_alpha(&self, alpha: &str) -> serde_json::Value {
        let mut doc = self.echo();
        doc["alpha"] = alpha.into();
        doc
    }
}

fn cache_key(field: &VectorField, params: &BuildParams) -> String {
    let fp = storage::hex_string(&field.fingerprint());
    format!(
        "{}-n{}-t{}-e{}-s{}-k{}.csgr",
        &fp[..16],
        params.resolution,
        params.t_flow.to_bits(),
        params.epsilon.to_bits(),
        params.step.to_bits(),
        params.samples_per_box,
    )
}
