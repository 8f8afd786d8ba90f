//! Builders for the six stochastic programs: every combination of decision
//! policy (two-stage, semi-dynamic, dynamic) and traffic representation
//! (flight-level "Lagrangian", flow-aggregated "Lagrangian-Eulerian").
//!
//! All builders return a [`MipModel`] plus a reversible [`VarMap`] from
//! domain-indexed variable keys to column ids, so solutions can be decoded
//! back into flight plans.

mod eulerian;
mod lagrangian;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::instance::{
    crossing_index, derive_paths, derive_time_windows, Instance, PathSet, Period, ResourceKind,
    Windows,
};
use crate::mip::MipModel;

pub use eulerian::build_lagrangian_eulerian;
pub use lagrangian::build_lagrangian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StagePolicy {
    /// Route and departure fixed before any uncertainty resolves.
    TwoStage,
    /// Decisions frozen at the scheduled departure time's information set.
    SemiDynamic,
    /// Decisions may react to everything observed before departure.
    Dynamic,
}

impl StagePolicy {
    pub const ALL: [StagePolicy; 3] =
        [StagePolicy::TwoStage, StagePolicy::SemiDynamic, StagePolicy::Dynamic];

    pub fn is_multistage(&self) -> bool {
        !matches!(self, StagePolicy::TwoStage)
    }

    pub fn name(&self) -> &'static str {
        match self {
            StagePolicy::TwoStage => "two-stage",
            StagePolicy::SemiDynamic => "semi-dynamic",
            StagePolicy::Dynamic => "dynamic",
        }
    }
}

impl std::str::FromStr for StagePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-stage" | "static" => Ok(StagePolicy::TwoStage),
            "semi-dynamic" | "semi" => Ok(StagePolicy::SemiDynamic),
            "dynamic" => Ok(StagePolicy::Dynamic),
            other => Err(Error::Parse(format!("unknown policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelFamily {
    Lagrangian,
    LagrangianEulerian,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 2] = [ModelFamily::Lagrangian, ModelFamily::LagrangianEulerian];

    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::Lagrangian => "lagrangian",
            ModelFamily::LagrangianEulerian => "lagrangian-eulerian",
        }
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lagrangian" | "l" => Ok(ModelFamily::Lagrangian),
            "lagrangian-eulerian" | "le" => Ok(ModelFamily::LagrangianEulerian),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Reproduce the published static flow-model objective verbatim, which
    /// puts (cg - ca) on the ground term instead of cg. Off by default: the
    /// aggregate air-holding count does not double-count ground delay, so
    /// there is nothing for -ca to cancel.
    pub literal_static_ground_coefficient: bool,
}

/// Identifies one model variable in domain terms. `scenario` is `None` for
/// first-stage copies shared across scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    /// Admitted to (or departed from) the route's `pos`-th resource by `t`.
    W {
        flight: u32,
        option: u32,
        pos: u32,
        period: Period,
        scenario: Option<u32>,
    },
    /// Arrived at the route's first post-airport resource by `t`.
    WTilde {
        flight: u32,
        option: u32,
        period: Period,
        scenario: Option<u32>,
    },
    /// Route indicator, shared across scenarios.
    RouteChoice { flight: u32, option: u32 },
    /// Departs at `period` on `option` under `scenario`.
    Depart {
        flight: u32,
        option: u32,
        period: Period,
        scenario: u32,
    },
    /// Route indicator per scenario.
    ScenarioRoute {
        flight: u32,
        option: u32,
        scenario: u32,
    },
    /// Planned direct demand entering the path's first resource.
    DirectDemand {
        path: u32,
        period: Period,
        scenario: Option<u32>,
    },
    /// Flights of a path crossing its `pos`-th resource in `period`.
    Crossing {
        path: u32,
        pos: u32,
        period: Period,
        scenario: u32,
    },
    /// Flights of a path holding before its `pos`-th resource in `period`.
    AirHold {
        path: u32,
        pos: u32,
        period: Period,
        scenario: u32,
    },
}

/// Bijection between used variable keys and the model's column range.
#[derive(Debug, Clone)]
pub struct VarMap {
    pub family: ModelFamily,
    pub policy: StagePolicy,
    keys: Vec<VarKey>,
    index: HashMap<VarKey, usize>,
}

impl VarMap {
    fn new(family: ModelFamily, policy: StagePolicy) -> Self {
        VarMap {
            family,
            policy,
            keys: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn col(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn key(&self, col: usize) -> VarKey {
        self.keys[col]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Exact column, row, and structural nonzero counts.
pub fn model_stats(model: &MipModel) -> (usize, usize, usize) {
    model.stats()
}

/// Build the requested variant.
pub fn build_model(
    inst: &Instance,
    family: ModelFamily,
    policy: StagePolicy,
    opts: &BuildOptions,
) -> Result<(MipModel, VarMap)> {
    match family {
        ModelFamily::Lagrangian => build_lagrangian(inst, policy),
        ModelFamily::LagrangianEulerian => build_lagrangian_eulerian(inst, policy, opts),
    }
}

const MAX_GENERATED_NAME: usize = 64;

/// Allocates model names: sanitizes embedded instance symbols, truncates
/// overlong names with a short content hash, and guarantees uniqueness.
pub(crate) struct NamePool {
    used: std::collections::HashSet<String>,
}

impl NamePool {
    pub(crate) fn new() -> Self {
        let mut used = std::collections::HashSet::new();
        for reserved in ["COST", "RHS", "BND", "MARKER"] {
            used.insert(reserved.to_string());
        }
        NamePool { used }
    }

    pub(crate) fn unique(&mut self, raw: String) -> String {
        let mut name = sanitize(&raw);
        if name.len() > MAX_GENERATED_NAME {
            let hash = fnv1a(name.as_bytes());
            name.truncate(MAX_GENERATED_NAME - 17);
            name.push('~');
            name.push_str(&format!("{hash:x}"));
        }
        if self.used.contains(&name) {
            let mut k = 1;
            loop {
                let candidate = format!("{name}~{k}");
                if !self.used.contains(&candidate) {
                    name = candidate;
                    break;
                }
                k += 1;
            }
        }
        self.used.insert(name.clone());
        name
    }
}

fn sanitize(raw: &str) -> String {
    raw.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "_.-[],".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Everything the builders need to look up repeatedly.
pub(crate) struct Ctx<'a> {
    pub inst: &'a Instance,
    pub windows: Windows,
    pub paths: PathSet,
    pub phi: std::collections::BTreeMap<String, Vec<(usize, usize)>>,
    pub res_index: HashMap<String, usize>,
    pub travel: HashMap<(usize, usize), Period>,
    pub kinds: Vec<ResourceKind>,
    pub nq: usize,
}

impl<'a> Ctx<'a> {
    pub(crate) fn prepare(inst: &'a Instance) -> Result<Self> {
        inst.validate()?;
        let windows = derive_time_windows(inst)?;
        let paths = derive_paths(inst);
        let phi = crossing_index(inst);
        let res_index = inst
            .network
            .resources
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        let travel = inst.arc_travel();
        let kinds = inst.network.resources.iter().map(|r| r.kind).collect();
        Ok(Ctx {
            inst,
            windows,
            paths,
            phi,
            res_index,
            travel,
            kinds,
            nq: inst.num_scenarios(),
        })
    }

    pub(crate) fn travel_between(&self, from: &str, to: &str) -> Period {
        self.travel[&(self.res_index[from], self.res_index[to])]
    }

    /// Position of resource `rid` on the (flight, option) route.
    pub(crate) fn pos_on_route(&self, fi: usize, oi: usize, rid: &str) -> Option<usize> {
        self.inst.flights[fi].options[oi]
            .omega
            .iter()
            .position(|r| r == rid)
    }

    /// Scenario sets whose departure decisions must agree at period `t`,
    /// in deterministic order; singletons are skipped.
    pub(crate) fn agreeing_sets_at(&self, t: Period) -> Vec<&[usize]> {
        self.inst
            .scenarios
            .branches
            .iter()
            .filter(|b| b.start <= t && t <= b.end && b.scenarios.len() >= 2)
            .map(|b| b.scenarios.as_slice())
            .collect()
    }
}

/// Register a model column under `key`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn add_var(
    model: &mut MipModel,
    vm: &mut VarMap,
    pool: &mut NamePool,
    key: VarKey,
    name: String,
    lo: f64,
    hi: f64,
    integer: bool,
) -> usize {
    let col = model.add_variable(pool.unique(name), lo, hi, integer);
    debug_assert_eq!(col, vm.keys.len());
    vm.keys.push(key);
    let clash = vm.index.insert(key, col);
    debug_assert!(clash.is_none(), "duplicate variable key {key:?}");
    col
}

/// Shared helper: add `k * (sum_t t (w_t - w_{t-1}))` to the objective for a
/// window of columns, telescoping the backward difference.
pub(crate) fn add_time_weighted_jumps(
    obj: &mut Vec<(usize, f64)>,
    k: f64,
    lo: Period,
    hi: Period,
    mut col: impl FnMut(Period) -> usize,
) {
    if k == 0.0 {
        return;
    }
    for t in lo..=hi {
        obj.push((col(t), k * t as f64));
        if t > lo {
            obj.push((col(t - 1), -(k * t as f64)));
        }
    }
}
