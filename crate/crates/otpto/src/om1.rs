//! Exact solver for the single-day historical-optimum stocking problem:
//! maximize the fraction of fully fulfilled orders (optionally augmented with
//! a GMV term that disambiguates equivalent optima) subject to the K/N/B
//! capacity constraints.
//!
//! Optimal stocking levels can be restricted to the per-SKU breakpoints
//! max(B, c_{oi}): lowering a level to the largest breakpoint below it covers
//! the same order lines with no more units. The solver runs a depth-first
//! branch-and-bound over SKUs; a brute-force enumerator over the same
//! breakpoint space serves as the test oracle.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{
    simulate_day, CoreError, DayData, IndexedHistory, SkuId, StockPlan, WarehouseConfig,
};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("no day {0} in the history")]
    UnknownDay(NaiveDate),
    #[error("day {0} has no orders")]
    EmptyDay(NaiveDate),
    #[error("instance too large for brute force: {0}")]
    OracleGuard(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    RateOnly,
    RatePlusGmv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub objective_mode: ObjectiveMode,
    /// Wall-clock limit in seconds. Leave unset for deterministic runs.
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    /// Strict-inequality slack used only in the MILP export.
    pub delta: f64,
    /// Big-M constant used only in the MILP export.
    pub big_m: f64,
}

impl SolverConfig {
    pub fn new(objective_mode: ObjectiveMode) -> Self {
        SolverConfig {
            objective_mode,
            time_limit: None,
            node_limit: None,
            delta: 1e-3,
            big_m: 1e5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    ProvenOptimal,
    IncumbentWithBound,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub plan: StockPlan,
    /// Fulfilled fraction of the day's orders under `plan`.
    pub objective_rate: f64,
    /// GMV objective component: (1/n) * sum(gmv_o / total_gmv) over fulfilled
    /// orders.
    pub objective_gmv_term: f64,
    pub status: SolveStatus,
    /// Valid upper bound on the achievable objective rate.
    pub upper_bound: f64,
    pub nodes_explored: u64,
}

/// Per-SKU search data: covered order lines and candidate stocking levels.
struct SkuCand {
    sku: SkuId,
    /// Rank of the SKU's external name among all instance SKUs, for the
    /// lexicographic tie-break.
    name_rank: u32,
    /// (order index, cumulative threshold c_{oi}), in arrival order.
    lines: Vec<(usize, u32)>,
    /// Distinct max(B, c_{oi}) values, ascending.
    levels: Vec<u32>,
}

struct Instance {
    skus: Vec<SkuCand>,
    /// Per order: (position in `skus`, threshold c).
    order_lines: Vec<Vec<(usize, u32)>>,
    order_gmv: Vec<i64>,
    n: usize,
    /// Objective scale: total GMV in cents for the combined objective, 1 for
    /// rate-only. Scaled objective = count * scale + fulfilled GMV.
    scale: i128,
    use_gmv: bool,
    k: u32,
    n_units: u64,
    b: u32,
}

fn build_instance(day: &DayData, history: &IndexedHistory, cfg: &WarehouseConfig, mode: ObjectiveMode) -> Instance {
    let n = day.orders.len();
    let mut per_sku: BTreeMap<SkuId, Vec<(usize, u32)>> = BTreeMap::new();
    let mut order_gmv = Vec::with_capacity(n);
    for (oi, order) in day.orders.iter().enumerate() {
        order_gmv.push(order.gmv_cents);
        for line in &order.lines {
            per_sku.entry(line.sku).or_default().push((oi, line.cumulative));
        }
    }
    let b = cfg.b_min_units;
    let mut skus: Vec<SkuCand> = per_sku
        .into_iter()
        .map(|(sku, lines)| {
            let mut levels: Vec<u32> = lines.iter().map(|&(_, c)| c.max(b)).collect();
            levels.sort_unstable();
            levels.dedup();
            SkuCand {
                sku,
                name_rank: 0,
                lines,
                levels,
            }
        })
        .collect();
    // name ranks for deterministic tie-breaks
    let mut by_name: Vec<usize> = (0..skus.len()).collect();
    by_name.sort_by(|&a, &b| history.sku_name(skus[a].sku).cmp(history.sku_name(skus[b].sku)));
    for (rank, idx) in by_name.into_iter().enumerate() {
        skus[idx].name_rank = rank as u32;
    }
    // order SKUs by descending coverage potential (covered line count)
    skus.sort_by(|a, b| {
        b.lines
            .len()
            .cmp(&a.lines.len())
            .then(a.name_rank.cmp(&b.name_rank))
    });
    let mut order_lines: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
    for (pos, sc) in skus.iter().enumerate() {
        for &(oi, c) in &sc.lines {
            order_lines[oi].push((pos, c));
        }
    }
    let total_gmv: i64 = order_gmv.iter().sum();
    let use_gmv = mode == ObjectiveMode::RatePlusGmv && total_gmv > 0;
    Instance {
        skus,
        order_lines,
        order_gmv,
        n,
        scale: if use_gmv { total_gmv as i128 } else { 1 },
        use_gmv,
        k: cfg.k_max_skus,
        n_units: cfg.n_max_units as u64,
        b,
    }
}

#[derive(Clone)]
struct Incumbent {
    obj: i128,
    count: u32,
    gmv: i64,
    units: u64,
    /// Sorted name ranks of stocked SKUs.
    name_set: Vec<u32>,
    levels: Vec<u32>,
}

struct Search<'a> {
    inst: &'a Instance,
    // per-order state
    remaining: Vec<u32>,
    alive: Vec<bool>,
    fulfilled_count: u32,
    fulfilled_gmv: i64,
    used_units: u64,
    used_slots: u32,
    levels: Vec<u32>,
    best: Option<Incumbent>,
    nodes: u64,
    node_limit: u64,
    deadline: Option<Instant>,
    time_limit: f64,
    aborted: bool,
    abort_ub: i128,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, cfg: &SolverConfig) -> Self {
        Search {
            remaining: inst.order_lines.iter().map(|ls| ls.len() as u32).collect(),
            alive: vec![true; inst.n],
            fulfilled_count: 0,
            fulfilled_gmv: 0,
            used_units: 0,
            used_slots: 0,
            levels: vec![0; inst.skus.len()],
            best: None,
            nodes: 0,
            node_limit: cfg.node_limit.unwrap_or(u64::MAX),
            deadline: cfg.time_limit.map(|_| Instant::now()),
            time_limit: cfg.time_limit.unwrap_or(f64::INFINITY),
            aborted: false,
            abort_ub: 0,
            inst,
        }
    }

    fn scaled(&self, count: u32, gmv: i64) -> i128 {
        if self.inst.use_gmv {
            count as i128 * self.inst.scale + gmv as i128
        } else {
            count as i128
        }
    }

    fn current_obj(&self) -> i128 {
        self.scaled(self.fulfilled_count, self.fulfilled_gmv)
    }

    /// Applies a level decision for the SKU at `pos`; returns undo data
    /// (orders that died, orders that became fulfilled).
    fn apply(&mut self, pos: usize, level: u32) -> (Vec<usize>, Vec<usize>) {
        let mut died = Vec::new();
        let mut done = Vec::new();
        for &(oi, c) in &self.inst.skus[pos].lines {
            self.remaining[oi] -= 1;
            if self.alive[oi] {
                if c > level {
                    self.alive[oi] = false;
                    died.push(oi);
                } else if self.remaining[oi] == 0 {
                    self.fulfilled_count += 1;
                    self.fulfilled_gmv += self.inst.order_gmv[oi];
                    done.push(oi);
                }
            }
        }
        self.used_units += level as u64;
        if level > 0 {
            self.used_slots += 1;
        }
        self.levels[pos] = level;
        (died, done)
    }

    fn undo(&mut self, pos: usize, level: u32, undo: (Vec<usize>, Vec<usize>)) {
        let (died, done) = undo;
        for oi in died {
            self.alive[oi] = true;
        }
        for oi in done {
            self.fulfilled_count -= 1;
            self.fulfilled_gmv -= self.inst.order_gmv[oi];
        }
        for &(oi, _) in &self.inst.skus[pos].lines {
            self.remaining[oi] += 1;
        }
        self.used_units -= level as u64;
        if level > 0 {
            self.used_slots -= 1;
        }
        self.levels[pos] = 0;
    }

    /// Optimistic completion bound: current objective plus every pending
    /// order that is still alive and not ruled out by remaining capacity.
    fn bound(&self, next_pos: usize) -> i128 {
        let mut b = self.current_obj();
        let slots_left = self.inst.k.saturating_sub(self.used_slots);
        let units_left = self.inst.n_units.saturating_sub(self.used_units);
        for oi in 0..self.inst.n {
            if !self.alive[oi] || self.remaining[oi] == 0 {
                continue;
            }
            let mut req_units: u64 = 0;
            let mut req_skus: u32 = 0;
            for &(pos, c) in &self.inst.order_lines[oi] {
                if pos >= next_pos {
                    req_units += c.max(self.inst.b) as u64;
                    req_skus += 1;
                }
            }
            if req_units <= units_left && req_skus <= slots_left {
                b += self.scaled(1, self.inst.order_gmv[oi]);
            }
        }
        b
    }

    fn maybe_update_incumbent(&mut self) {
        let obj = self.current_obj();
        let stocked: Vec<usize> = (0..self.levels.len()).filter(|&i| self.levels[i] > 0).collect();
        let mut name_set: Vec<u32> = stocked.iter().map(|&i| self.inst.skus[i].name_rank).collect();
        name_set.sort_unstable();
        let replace = match &self.best {
            None => true,
            Some(best) => {
                obj > best.obj
                    || (obj == best.obj
                        && (self.used_units < best.units
                            || (self.used_units == best.units && name_set < best.name_set)))
            }
        };
        if replace {
            self.best = Some(Incumbent {
                obj,
                count: self.fulfilled_count,
                gmv: self.fulfilled_gmv,
                units: self.used_units,
                name_set,
                levels: self.levels.clone(),
            });
        }
    }

    fn limits_hit(&mut self) -> bool {
        if self.nodes >= self.node_limit {
            return true;
        }
        if let Some(start) = self.deadline {
            if self.nodes % 4096 == 0 && start.elapsed().as_secs_f64() > self.time_limit {
                return true;
            }
        }
        false
    }

    fn dfs(&mut self, pos: usize, entry_bound: i128) {
        self.nodes += 1;
        if self.limits_hit() {
            self.aborted = true;
            self.abort_ub = self.abort_ub.max(entry_bound);
            return;
        }
        if pos == self.inst.skus.len() {
            self.maybe_update_incumbent();
            return;
        }

        // Evaluate every branch bound up front, then explore best-first.
        let mut branches: Vec<(u32, i128)> = Vec::with_capacity(self.inst.skus[pos].levels.len() + 1);
        let slots_ok = self.used_slots < self.inst.k;
        for li in (0..self.inst.skus[pos].levels.len()).rev() {
            let level = self.inst.skus[pos].levels[li];
            if !slots_ok || self.used_units + level as u64 > self.inst.n_units {
                continue;
            }
            let undo = self.apply(pos, level);
            let b = self.bound(pos + 1);
            self.undo(pos, level, undo);
            branches.push((level, b));
        }
        {
            let undo = self.apply(pos, 0);
            let b = self.bound(pos + 1);
            self.undo(pos, 0, undo);
            branches.push((0, b));
        }
        branches.sort_by(|a, b| b.1.cmp(&a.1).then(b.0.cmp(&a.0)));

        for bi in 0..branches.len() {
            let (level, b) = branches[bi];
            if self.aborted {
                // remaining subtrees are unexplored; fold their bounds in
                for &(_, rb) in &branches[bi..] {
                    self.abort_ub = self.abort_ub.max(rb);
                }
                return;
            }
            if let Some(best) = &self.best {
                if b < best.obj {
                    continue;
                }
                if b == best.obj && self.used_units + level as u64 > best.units {
                    // a completion can only tie the objective with more units
                    continue;
                }
            }
            let undo = self.apply(pos, level);
            self.dfs(pos + 1, b);
            self.undo(pos, level, undo);
        }
    }
}

fn outcome_from_incumbent(
    inst: &Instance,
    history: &IndexedHistory,
    date: NaiveDate,
    best: &Incumbent,
    status: SolveStatus,
    upper_bound: f64,
    nodes: u64,
) -> SolveOutcome {
    let mut entries = BTreeMap::new();
    for (pos, sc) in inst.skus.iter().enumerate() {
        if best.levels[pos] > 0 {
            entries.insert(history.sku_name(sc.sku).to_string(), best.levels[pos] as f64);
        }
    }
    let total_gmv: i64 = inst.order_gmv.iter().sum();
    let gmv_term = if total_gmv > 0 {
        best.gmv as f64 / total_gmv as f64 / inst.n as f64
    } else {
        0.0
    };
    SolveOutcome {
        plan: StockPlan { day: date, entries },
        objective_rate: best.count as f64 / inst.n as f64,
        objective_gmv_term: gmv_term,
        status,
        upper_bound,
        nodes_explored: nodes,
    }
}

/// Solves the single-day stocking problem exactly (subject to optional node
/// and time limits, in which case the incumbent plus a valid bound is
/// returned).
pub fn solve_exact(
    history: &IndexedHistory,
    date: NaiveDate,
    cfg: &WarehouseConfig,
    solver: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    let day = history.day(date).ok_or(SolveError::UnknownDay(date))?;
    if day.orders.is_empty() {
        return Err(SolveError::EmptyDay(date));
    }
    if cfg.k_max_skus == 0 || cfg.n_max_units < cfg.b_min_units {
        // Nothing can be stocked; the empty plan is the unique feasible plan.
        return Ok(SolveOutcome {
            plan: StockPlan::empty(date),
            objective_rate: 0.0,
            objective_gmv_term: 0.0,
            status: SolveStatus::ProvenOptimal,
            upper_bound: 0.0,
            nodes_explored: 0,
        });
    }
    let inst = build_instance(day, history, cfg, solver.objective_mode);
    let mut search = Search::new(&inst, solver);
    // Seed the empty plan so an incumbent exists even if limits abort the
    // search immediately.
    search.maybe_update_incumbent();
    let root_bound = search.bound(0);
    search.dfs(0, root_bound);
    let best = search.best.clone().expect("incumbent seeded before search");
    let (status, ub) = if search.aborted {
        let ub_scaled = search.abort_ub.max(best.obj);
        let ub_rate = if inst.use_gmv {
            (ub_scaled as f64 / inst.scale as f64 / inst.n as f64).min(1.0)
        } else {
            ub_scaled as f64 / inst.n as f64
        };
        (SolveStatus::IncumbentWithBound, ub_rate)
    } else {
        (SolveStatus::ProvenOptimal, best.count as f64 / inst.n as f64)
    };
    Ok(outcome_from_incumbent(
        &inst, history, date, &best, status, ub, search.nodes,
    ))
}

/// Exhaustive enumeration over all per-SKU breakpoint choices. Independent of
/// the branch-and-bound: every candidate plan is scored with the core
/// simulator.
pub fn brute_force_oracle(
    history: &IndexedHistory,
    date: NaiveDate,
    cfg: &WarehouseConfig,
    mode: ObjectiveMode,
) -> Result<SolveOutcome, SolveError> {
    let day = history.day(date).ok_or(SolveError::UnknownDay(date))?;
    if day.orders.is_empty() {
        return Err(SolveError::EmptyDay(date));
    }
    let inst = build_instance(day, history, cfg, mode);
    if inst.skus.len() > 8 {
        return Err(SolveError::OracleGuard(format!(
            "{} SKUs exceeds the limit of 8",
            inst.skus.len()
        )));
    }
    let mut combos: u64 = 1;
    for sc in &inst.skus {
        combos = combos.saturating_mul(sc.levels.len() as u64 + 1);
        if combos > 10_000_000 {
            return Err(SolveError::OracleGuard(format!(
                "more than 1e7 level combinations ({combos})"
            )));
        }
    }

    let allow_stock = cfg.k_max_skus > 0 && cfg.n_max_units >= cfg.b_min_units;
    let total_gmv: i64 = inst.order_gmv.iter().sum();
    let mut choice = vec![0usize; inst.skus.len()]; // 0 = unstocked, else level index + 1
    let mut best: Option<Incumbent> = None;
    let mut visited: u64 = 0;
    loop {
        visited += 1;
        // feasibility under K and N
        let mut units: u64 = 0;
        let mut slots: u32 = 0;
        let mut entries = BTreeMap::new();
        for (pos, &ch) in choice.iter().enumerate() {
            if ch > 0 {
                let level = inst.skus[pos].levels[ch - 1];
                units += level as u64;
                slots += 1;
                entries.insert(
                    history.sku_name(inst.skus[pos].sku).to_string(),
                    level as f64,
                );
            }
        }
        let feasible = slots <= cfg.k_max_skus
            && units <= cfg.n_max_units as u64
            && (allow_stock || slots == 0);
        if feasible {
            let plan = StockPlan {
                day: date,
                entries,
            };
            let report = simulate_day(history, day, &plan)?;
            let obj = if mode == ObjectiveMode::RatePlusGmv && total_gmv > 0 {
                report.fulfilled_count as i128 * total_gmv as i128
                    + report.fulfilled_gmv_cents as i128
            } else {
                report.fulfilled_count as i128
            };
            let mut name_set: Vec<u32> = choice
                .iter()
                .enumerate()
                .filter(|&(_, &ch)| ch > 0)
                .map(|(pos, _)| inst.skus[pos].name_rank)
                .collect();
            name_set.sort_unstable();
            let cand = Incumbent {
                obj,
                count: report.fulfilled_count as u32,
                gmv: report.fulfilled_gmv_cents,
                units,
                name_set,
                levels: choice
                    .iter()
                    .enumerate()
                    .map(|(pos, &ch)| if ch > 0 { inst.skus[pos].levels[ch - 1] } else { 0 })
                    .collect(),
            };
            let replace = match &best {
                None => true,
                Some(b) => {
                    cand.obj > b.obj
                        || (cand.obj == b.obj
                            && (cand.units < b.units
                                || (cand.units == b.units && cand.name_set < b.name_set)))
                }
            };
            if replace {
                best = Some(cand);
            }
        }
        // next combination
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                let best = best.expect("the empty plan is always feasible");
                let rate = best.count as f64 / inst.n as f64;
                return Ok(outcome_from_incumbent(
                    &inst,
                    history,
                    date,
                    &best,
                    SolveStatus::ProvenOptimal,
                    rate,
                    visited,
                ));
            }
            choice[pos] += 1;
            if choice[pos] <= inst.skus[pos].levels.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Writes the big-M MILP formulation of the day's instance in LP text format
/// for cross-validation against external solvers.
pub fn export_lp(
    history: &IndexedHistory,
    date: NaiveDate,
    cfg: &WarehouseConfig,
    solver: &SolverConfig,
) -> Result<String, SolveError> {
    let day = history.day(date).ok_or(SolveError::UnknownDay(date))?;
    if day.orders.is_empty() {
        return Err(SolveError::EmptyDay(date));
    }
    let inst = build_instance(day, history, cfg, solver.objective_mode);
    let n = inst.n as f64;
    let total_gmv: i64 = inst.order_gmv.iter().sum();
    let m = solver.big_m;
    let delta = solver.delta;

    let mut s = String::new();
    let _ = writeln!(s, "\\ Historical-optimum stocking MILP for {date}");
    let _ = writeln!(s, "Maximize");
    let mut obj = String::from(" obj:");
    for oi in 0..inst.n {
        let mut coeff = 1.0 / n;
        if solver.objective_mode == ObjectiveMode::RatePlusGmv && total_gmv > 0 {
            coeff += inst.order_gmv[oi] as f64 / total_gmv as f64 / n;
        }
        let _ = write!(obj, " + {coeff} p_{oi}");
    }
    let _ = writeln!(s, "{obj}");
    let _ = writeln!(s, "Subject To");
    let mut k_row = String::from(" k_cap:");
    for pos in 0..inst.skus.len() {
        let _ = write!(k_row, " + y_{pos}");
    }
    let _ = writeln!(s, "{k_row} <= {}", cfg.k_max_skus);
    let mut n_row = String::from(" n_cap:");
    for pos in 0..inst.skus.len() {
        let _ = write!(n_row, " + x_{pos}");
    }
    let _ = writeln!(s, "{n_row} <= {}", cfg.n_max_units);
    for (pos, sc) in inst.skus.iter().enumerate() {
        let d_i: u32 = sc.lines.iter().map(|&(_, c)| c).max().unwrap_or(0);
        let _ = writeln!(s, " b_min_{pos}: x_{pos} - {} y_{pos} >= 0", cfg.b_min_units);
        let _ = writeln!(s, " x_ub_{pos}: x_{pos} <= {}", d_i.max(cfg.b_min_units));
        let _ = writeln!(s, " link_xy_{pos}: x_{pos} - {m} y_{pos} <= 0");
        let _ = writeln!(s, " link_yx_{pos}: {m} x_{pos} - y_{pos} >= 0");
        for &(oi, c) in &sc.lines {
            let _ = writeln!(
                s,
                " cover_lo_{oi}_{pos}: x_{pos} - {m} z_{oi}_{pos} <= {}",
                c as f64 - delta
            );
            let _ = writeln!(
                s,
                " cover_hi_{oi}_{pos}: x_{pos} - {m} z_{oi}_{pos} >= {}",
                c as f64 - m
            );
        }
    }
    for (oi, lines) in inst.order_lines.iter().enumerate() {
        let s_o = lines.len() as f64;
        let mut z_sum = String::new();
        for &(pos, _) in lines {
            let _ = write!(z_sum, " + z_{oi}_{pos}");
        }
        let _ = writeln!(s, " full_lo_{oi}:{z_sum} - {m} p_{oi} <= {}", s_o - delta);
        let _ = writeln!(s, " full_hi_{oi}:{z_sum} - {m} p_{oi} >= {}", s_o - m);
    }
    let _ = writeln!(s, "Bounds");
    for pos in 0..inst.skus.len() {
        let _ = writeln!(s, " 0 <= x_{pos}");
    }
    let _ = writeln!(s, "Binary");
    for pos in 0..inst.skus.len() {
        let _ = writeln!(s, " y_{pos}");
    }
    for (oi, lines) in inst.order_lines.iter().enumerate() {
        for &(pos, _) in lines {
            let _ = writeln!(s, " z_{oi}_{pos}");
        }
        let _ = writeln!(s, " p_{oi}");
    }
    let _ = writeln!(s, "End");
    Ok(s)
}

/// Checks a simulated (x, z, p) assignment against the big-M constraint
/// system with the given delta and M. Test support for the fulfillment
/// semantics.
pub fn satisfies_big_m_system(
    history: &IndexedHistory,
    day: &DayData,
    plan: &StockPlan,
    report: &crate::core::FulfillmentReport,
    delta: f64,
    big_m: f64,
) -> bool {
    for (oi, order) in day.orders.iter().enumerate() {
        let outcome = &report.outcomes[oi];
        let mut z_sum = 0.0;
        for (li, line) in order.lines.iter().enumerate() {
            let x = plan
                .entries
                .get(history.sku_name(line.sku))
                .copied()
                .unwrap_or(0.0);
            let z = if outcome.line_supplied[li] { 1.0 } else { 0.0 };
            let c = line.cumulative as f64;
            if x - c + delta > big_m * z + 1e-9 {
                return false;
            }
            if x - c < big_m * (z - 1.0) - 1e-9 {
                return false;
            }
            z_sum += z;
        }
        let s_o = order.sku_count() as f64;
        let p = if outcome.fulfilled { 1.0 } else { 0.0 };
        if z_sum - s_o + delta > big_m * p + 1e-9 {
            return false;
        }
        if z_sum - s_o < big_m * (p - 1.0) - 1e-9 {
            return false;
        }
    }
    true
}
