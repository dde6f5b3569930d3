//! TOML run configuration: graph source, poll parameters, adversary block,
//! fault plan, trial counts and sweep grids. Every scalar key can be
//! overridden by the command-line flag of the same name.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use epol::adversary::{AdversaryModel, OvershareCount, TrueVotePolicy};
use epol::graph::{
    check_m_broadcasting, default_m_for_circle, generate_backbone, generate_circle,
    generate_cluster_ring, generate_geometric_1d, generate_layered, parse_graph,
    BroadcastCertificate, SocialGraph,
};
use epol::sim::{sample_coalition, CrashTiming, FaultPlan, PollConfig};

/// Fallback seed when neither the config, the flag, nor EPOL_SEED says
/// otherwise ("EPOL" in ASCII).
pub const DEFAULT_SEED: u64 = 0x45504F4C;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSection,
    pub poll: PollSection,
    #[serde(default)]
    pub adversary: AdversarySection,
    #[serde(default)]
    pub faults: FaultSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    /// Family name: layered | backbone | geometric | cluster-ring | circle.
    pub family: Option<String>,
    /// Alternatively, a path to an edge-list file.
    pub path: Option<PathBuf>,
    pub m: Option<usize>,
    pub layers: Option<Vec<usize>>,
    pub backbone_size: Option<usize>,
    pub outer_attachments: Option<Vec<usize>>,
    pub positions: Option<Vec<f64>>,
    pub threshold: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PollSection {
    pub k: usize,
    pub gamma: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_true")]
    pub early_decide: bool,
    #[serde(default)]
    pub require_pg3: bool,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySection {
    /// Explicit member ids; mutually exclusive with `coalition_size`.
    pub coalition: Option<Vec<usize>>,
    /// Draw this many members uniformly (seeded).
    pub coalition_size: Option<usize>,
    #[serde(default = "default_true")]
    pub overshare: bool,
    /// "full" (2k+1) or "gamma" (drawn like honest nodes).
    #[serde(default)]
    pub overshare_count: Option<String>,
    #[serde(default = "default_true")]
    pub invert: bool,
    #[serde(default = "default_true")]
    pub corrupt_forward: bool,
    #[serde(default)]
    pub out_of_range: bool,
    #[serde(default)]
    pub rho: usize,
    #[serde(default = "default_true")]
    pub knows_share_count: bool,
    /// "plus" | "minus" | "alpha".
    #[serde(default)]
    pub true_vote: Option<String>,
    #[serde(default = "default_true")]
    pub avoid_dishonest_producers: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSection {
    #[serde(default)]
    pub crash_prob: f64,
    #[serde(default)]
    pub loss_prob: f64,
    #[serde(default)]
    pub exempt_dishonest: bool,
    /// "window" (default) or "start".
    #[serde(default)]
    pub crash_timing: Option<String>,
    #[serde(default)]
    pub forced_crashes: Vec<usize>,
}

impl Default for AdversarySection {
    fn default() -> Self {
        AdversarySection {
            coalition: None,
            coalition_size: None,
            overshare: true,
            overshare_count: None,
            invert: true,
            corrupt_forward: true,
            out_of_range: false,
            rho: 0,
            knows_share_count: true,
            true_vote: None,
            avoid_dishonest_producers: true,
        }
    }
}

impl Default for FaultSection {
    fn default() -> Self {
        FaultSection {
            crash_prob: 0.0,
            loss_prob: 0.0,
            exempt_dishonest: false,
            crash_timing: None,
            forced_crashes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Coalition sizes for the disclosure figures.
    pub d_values: Option<Vec<usize>>,
    /// Top-class gamma weights for the disclosure figures.
    pub gamma_k_values: Option<Vec<f64>>,
    /// Crash probabilities for the fault grid.
    pub r_values: Option<Vec<f64>>,
    /// Loss probabilities for the fault grid.
    pub l_values: Option<Vec<f64>>,
    /// Disclosure-model trials per grid point.
    pub disclosure_trials: Option<u64>,
    /// Fault-model trials per grid point.
    pub fault_trials: Option<u64>,
    /// Full poll trials per grid point (impact columns).
    pub poll_trials: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = toml::from_str(&text).context("parsing config")?;
        config.poll_validate()?;
        Ok(config)
    }

    fn poll_validate(&self) -> Result<()> {
        if self.poll.gamma.len() != self.poll.k + 1 {
            bail!(
                "gamma has {} entries, expected k+1 = {}",
                self.poll.gamma.len(),
                self.poll.k + 1
            );
        }
        let total: f64 = self.poll.gamma.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            bail!("gamma sums to {total}, expected 1");
        }
        if !(0.0..=1.0).contains(&self.poll.alpha) {
            bail!("alpha must lie in [0,1]");
        }
        for (name, v) in [
            ("crash_prob", self.faults.crash_prob),
            ("loss_prob", self.faults.loss_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                bail!("{name} must lie in [0,1]");
            }
        }
        if self.adversary.rho > self.poll.k {
            bail!("rho = {} exceeds k = {}", self.adversary.rho, self.poll.k);
        }
        Ok(())
    }

    /// Materialize the graph and its broadcast certificate.
    pub fn build_graph(&self) -> Result<(SocialGraph, BroadcastCertificate, usize)> {
        let g = &self.graph;
        let graph = if let Some(path) = &g.path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading graph {}", path.display()))?;
            parse_graph(&text)?
        } else {
            build_family(g, self.poll.k)?
        };
        let m = match g.m {
            Some(m) => m,
            None => match g.family.as_deref() {
                Some("circle") => default_m_for_circle(g.n.context("circle needs n")?, self.poll.k),
                _ => bail!("graph.m is required unless the family implies one"),
            },
        };
        let cert = match check_m_broadcasting(&graph, m) {
            epol::graph::BroadcastCheck::Ok(cert) => cert,
            epol::graph::BroadcastCheck::Failed { source, blocked } => bail!(
                "graph does not satisfy the {m}-broadcasting property: source {source}, node {blocked}"
            ),
        };
        Ok((graph, cert, m))
    }

    pub fn poll_config(&self, m: usize) -> PollConfig {
        PollConfig {
            k: self.poll.k,
            m,
            gamma: self.poll.gamma.clone(),
            alpha: self.poll.alpha,
            early_decide: self.poll.early_decide,
            require_pg3: self.poll.require_pg3,
        }
    }

    pub fn adversary(&self, n: usize, seed: u64) -> Result<AdversaryModel> {
        let a = &self.adversary;
        let coalition = match (&a.coalition, a.coalition_size) {
            (Some(ids), None) => {
                let mut ids = ids.clone();
                ids.sort_unstable();
                ids.dedup();
                if ids.iter().any(|&v| v >= n) {
                    bail!("coalition id out of range");
                }
                ids
            }
            (None, Some(size)) => {
                if size > n {
                    bail!("coalition_size exceeds population");
                }
                sample_coalition(n, size, seed)
            }
            (None, None) => Vec::new(),
            (Some(_), Some(_)) => {
                bail!("set either adversary.coalition or coalition_size, not both")
            }
        };
        let overshare_count = match a.overshare_count.as_deref() {
            None | Some("full") => OvershareCount::Full,
            Some("gamma") => OvershareCount::GammaDrawn,
            Some(other) => bail!("unknown overshare_count {other:?}"),
        };
        let true_vote = match a.true_vote.as_deref() {
            None | Some("plus") => TrueVotePolicy::AlwaysPlus,
            Some("minus") => TrueVotePolicy::AlwaysMinus,
            Some("alpha") => TrueVotePolicy::FollowAlpha,
            Some(other) => bail!("unknown true_vote {other:?}"),
        };
        Ok(AdversaryModel {
            coalition,
            overshare: a.overshare,
            overshare_count,
            invert: a.invert,
            corrupt_forward: a.corrupt_forward,
            out_of_range: a.out_of_range,
            rho: a.rho,
            knows_share_count: a.knows_share_count,
            true_vote,
            avoid_dishonest_producers: a.avoid_dishonest_producers,
        })
    }

    pub fn fault_plan(&self) -> Result<FaultPlan> {
        let f = &self.faults;
        let crash_timing = match f.crash_timing.as_deref() {
            None | Some("window") => CrashTiming::UniformWindow,
            Some("start") => CrashTiming::AtStart,
            Some(other) => bail!("unknown crash_timing {other:?}"),
        };
        Ok(FaultPlan {
            crash_prob: f.crash_prob,
            loss_prob: f.loss_prob,
            exempt_dishonest: f.exempt_dishonest,
            crash_timing,
            forced_crashes: f.forced_crashes.clone(),
        })
    }
}

fn build_family(g: &GraphSection, k: usize) -> Result<SocialGraph> {
    let family = g
        .family
        .as_deref()
        .context("graph.family or graph.path required")?;
    let graph = match family {
        "layered" => generate_layered(
            g.layers
                .as_deref()
                .context("layered graphs need graph.layers")?,
            g.m.context("layered graphs need graph.m")?,
        )?,
        "backbone" => generate_backbone(
            g.backbone_size
                .context("backbone graphs need graph.backbone_size")?,
            g.outer_attachments.as_deref().unwrap_or(&[]),
            g.m.context("backbone graphs need graph.m")?,
        )?,
        "geometric" => generate_geometric_1d(
            g.positions
                .as_deref()
                .context("geometric graphs need graph.positions")?,
            g.threshold
                .context("geometric graphs need graph.threshold")?,
            g.m.context("geometric graphs need graph.m")?,
        )?,
        "cluster-ring" => {
            generate_cluster_ring(g.n.context("cluster-ring graphs need graph.n")?, k)?
        }
        "circle" => generate_circle(g.n.context("circle graphs need graph.n")?, k)?,
        other => bail!("unknown graph family {other:?}"),
    };
    Ok(graph)
}

/// Resolve the master seed: flag beats config beats EPOL_SEED beats default.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> u64 {
    flag.or(config)
        .or_else(|| std::env::var("EPOL_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(DEFAULT_SEED)
}
