use super::params::{FactorKind, FactorParams, FactorPopulation, ModelParams};
use super::table::MortalityTable;
use super::walk::RandomWalkSpec;
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 10_000;
const TOLERANCE: f64 = 1e-10;
const WARM_UP_TOLERANCE: f64 = 1e-6;

/// Loading/index pairs entering each population's predictor.
struct Layout {
    n_load: usize,
    /// Loading paired with each index.
    index_load: Vec<usize>,
    /// `(loading, index)` terms per population.
    terms: Vec<Vec<(usize, usize)>>,
    /// Loadings switched on in the warm-up stage.
    warm_up: Vec<usize>,
}

impl Layout {
    fn of(kind: FactorKind) -> Layout {
        match kind {
            FactorKind::LeeCarter => Layout {
                n_load: 1,
                index_load: vec![0],
                terms: vec![vec![(0, 0)]],
                warm_up: vec![0],
            },
            // beta1, beta2, bar_beta; kappa1, kappa2, bar_kappa
            FactorKind::LiLee => Layout {
                n_load: 3,
                index_load: vec![0, 1, 2],
                terms: vec![vec![(0, 0), (2, 2)], vec![(1, 1), (2, 2)]],
                warm_up: vec![2],
            },
            // beta, bar_beta; kappa1, kappa2, bar_kappa1, bar_kappa2
            FactorKind::Cae => Layout {
                n_load: 2,
                index_load: vec![0, 0, 1, 1],
                terms: vec![vec![(0, 0), (1, 2)], vec![(0, 1), (1, 3)]],
                warm_up: vec![0],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct State {
    kind: FactorKind,
    lambda: Vec<Vec<f64>>,
    load: Vec<Vec<f64>>,
    index: Vec<Vec<f64>>,
}

impl State {
    /// Unit-sum loadings and zero-mean indices; for the common age effect
    /// model additionally makes the second index orthogonal to the first.
    fn normalize(&mut self, layout: &Layout, active: &[bool]) {
        self.scale(layout, active);
        for k in 0..self.index.len() {
            let j = layout.index_load[k];
            if !active[j] {
                continue;
            }
            let m = self.index[k].iter().sum::<f64>() / self.index[k].len() as f64;
            for v in &mut self.index[k] {
                *v -= m;
            }
            for (pop, terms) in layout.terms.iter().enumerate() {
                if terms.contains(&(j, k)) {
                    for (l, b) in self.lambda[pop].iter_mut().zip(&self.load[j]) {
                        *l += b * m;
                    }
                }
            }
        }
        if self.kind == FactorKind::Cae && active[0] && active[1] {
            let dot =
                |a: usize, b: usize| -> f64 { self.index[a].iter().zip(&self.index[b]).map(|(x, y)| x * y).sum() };
            let kk = dot(0, 0) + dot(1, 1);
            if kk > 0.0 {
                let c = (dot(2, 0) + dot(3, 1)) / kk;
                if c != 0.0 {
                    for (k, kb) in [(0, 2), (1, 3)] {
                        let first = self.index[k].clone();
                        for (v, f) in self.index[kb].iter_mut().zip(first) {
                            *v -= c * f;
                        }
                    }
                    let bar = self.load[1].clone();
                    for (b, bb) in self.load[0].iter_mut().zip(bar) {
                        *b += c * bb;
                    }
                    self.scale(layout, active);
                }
            }
        }
    }

    fn flatten(&self) -> Vec<f64> {
        self.lambda
            .iter()
            .chain(&self.load)
            .chain(&self.index)
            .flatten()
            .copied()
            .collect()
    }

    fn assign(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        for v in self.lambda.iter_mut().chain(&mut self.load).chain(&mut self.index) {
            for slot in v.iter_mut() {
                *slot = *it.next().expect("parameter vector length");
            }
        }
    }

    fn scale(&mut self, layout: &Layout, active: &[bool]) {
        for j in (0..layout.n_load).filter(|&j| active[j]) {
            let s: f64 = self.load[j].iter().sum();
            if s == 0.0 || !s.is_finite() {
                continue;
            }
            for b in &mut self.load[j] {
                *b /= s;
            }
            for (k, _) in layout.index_load.iter().enumerate().filter(|(_, &l)| l == j) {
                for v in &mut self.index[k] {
                    *v *= s;
                }
            }
        }
    }
}

struct Fitter<'a> {
    layout: Layout,
    tables: &'a [&'a MortalityTable],
    na: usize,
    ny: usize,
    state: State,
    active: Vec<bool>,
    fitted: Vec<Vec<f64>>,
}

impl<'a> Fitter<'a> {
    fn refresh(&mut self, pop: usize) {
        let (na, ny) = (self.na, self.ny);
        let s = &self.state;
        let table = self.tables[pop];
        let out = &mut self.fitted[pop];
        for t in 0..ny {
            for x in 0..na {
                let mut eta = s.lambda[pop][x];
                for &(j, k) in &self.layout.terms[pop] {
                    if self.active[j] {
                        eta += s.load[j][x] * s.index[k][t];
                    }
                }
                out[t * na + x] = table.exposure_at(t, x) * eta.exp();
            }
        }
    }

    fn refresh_all(&mut self) {
        for pop in 0..self.tables.len() {
            self.refresh(pop);
        }
    }

    fn residual(&self, pop: usize, t: usize, x: usize) -> (f64, f64) {
        let f = self.fitted[pop][t * self.na + x];
        (self.tables[pop].deaths_at(t, x) - f, f)
    }

    /// One pass of elementwise Newton updates; returns the largest step.
    fn sweep(&mut self) -> f64 {
        let (na, ny) = (self.na, self.ny);
        let mut max_step = 0.0f64;
        for pop in 0..self.tables.len() {
            for x in 0..na {
                let (mut num, mut den) = (0.0, 0.0);
                for t in 0..ny {
                    let (r, f) = self.residual(pop, t, x);
                    num += r;
                    den += f;
                }
                max_step = max_step.max(apply(&mut self.state.lambda[pop][x], num, den));
            }
            self.refresh(pop);
        }
        for j in 0..self.layout.n_load {
            if !self.active[j] {
                continue;
            }
            let users = self.users_of_load(j);
            for x in 0..na {
                let (mut num, mut den) = (0.0, 0.0);
                for &(pop, k) in &users {
                    for t in 0..ny {
                        let (r, f) = self.residual(pop, t, x);
                        let kv = self.state.index[k][t];
                        num += r * kv;
                        den += f * kv * kv;
                    }
                }
                max_step = max_step.max(apply(&mut self.state.load[j][x], num, den));
            }
            for &(pop, _) in &users {
                self.refresh(pop);
            }
        }
        for k in 0..self.state.index.len() {
            let j = self.layout.index_load[k];
            if !self.active[j] {
                continue;
            }
            let pops: Vec<usize> = (0..self.tables.len())
                .filter(|&p| self.layout.terms[p].contains(&(j, k)))
                .collect();
            for t in 0..ny {
                let (mut num, mut den) = (0.0, 0.0);
                for &pop in &pops {
                    for x in 0..na {
                        let (r, f) = self.residual(pop, t, x);
                        let b = self.state.load[j][x];
                        num += r * b;
                        den += f * b * b;
                    }
                }
                max_step = max_step.max(apply(&mut self.state.index[k][t], num, den));
            }
            for &pop in &pops {
                self.refresh(pop);
            }
        }
        self.state.normalize(&self.layout, &self.active);
        self.refresh_all();
        max_step
    }

    fn users_of_load(&self, j: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (pop, terms) in self.layout.terms.iter().enumerate() {
            for &(l, k) in terms {
                if l == j {
                    out.push((pop, k));
                }
            }
        }
        out
    }

    /// Sweeps until the largest Newton step falls below `tolerance`. Every
    /// two sweeps are followed by a squared extrapolation along the sweep
    /// direction, kept only if it does not lower the likelihood.
    fn run(&mut self, tolerance: f64, fail: bool) -> Result<usize> {
        let mut sweeps = 0;
        let mut last = f64::INFINITY;
        while sweeps < MAX_SWEEPS {
            let theta0 = self.state.flatten();
            let mut points = Vec::with_capacity(2);
            for _ in 0..2 {
                last = self.sweep();
                sweeps += 1;
                self.check_finite(last, sweeps)?;
                if last < tolerance {
                    return Ok(sweeps);
                }
                points.push(self.state.flatten());
            }
            let ll2 = self.log_likelihood();
            let (theta1, theta2) = (&points[0], &points[1]);
            let mut rr = 0.0;
            let mut vv = 0.0;
            for ((a, b), c) in theta0.iter().zip(theta1).zip(theta2) {
                rr += (b - a) * (b - a);
                vv += (c - 2.0 * b + a) * (c - 2.0 * b + a);
            }
            let alpha = -(rr / vv).sqrt();
            if !(alpha < -1.0 && alpha.is_finite()) {
                continue;
            }
            let jump: Vec<f64> = theta0
                .iter()
                .zip(theta1)
                .zip(theta2)
                .map(|((a, b), c)| a - 2.0 * alpha * (b - a) + alpha * alpha * (c - 2.0 * b + a))
                .collect();
            self.state.assign(&jump);
            self.refresh_all();
            let step = self.sweep();
            sweeps += 1;
            let ll3 = self.log_likelihood();
            if step.is_finite() && ll3.is_finite() && ll3 >= ll2 {
                last = step;
                if last < tolerance {
                    return Ok(sweeps);
                }
            } else {
                self.state.assign(theta2);
                self.refresh_all();
            }
        }
        if fail {
            Err(Error::NonConvergence {
                iterations: sweeps,
                last_step: last,
            })
        } else {
            Ok(sweeps)
        }
    }

    fn check_finite(&self, step: f64, sweeps: usize) -> Result<()> {
        if step.is_finite() {
            Ok(())
        } else {
            Err(Error::Numerical(format!(
                "{} fit diverged after {sweeps} sweeps",
                self.state.kind.as_str()
            )))
        }
    }

    fn log_likelihood(&self) -> f64 {
        let mut ll = 0.0;
        for (pop, table) in self.tables.iter().enumerate() {
            for (d, f) in table.deaths().iter().zip(&self.fitted[pop]) {
                ll += if *d > 0.0 { d * f.ln() - f } else { -f };
            }
        }
        ll
    }
}

fn apply(value: &mut f64, num: f64, den: f64) -> f64 {
    if den > 0.0 && den.is_finite() {
        let step = num / den;
        *value += step;
        step.abs()
    } else {
        0.0
    }
}

/// Poisson maximum-likelihood fit of a Lee-Carter (one table), Li-Lee or
/// common age effect (two tables on the same grid) model.
pub fn fit_factor_model(tables: &[&MortalityTable], kind: FactorKind) -> Result<ModelParams> {
    if tables.len() != kind.populations() {
        return Err(Error::invalid(format!(
            "{} takes {} table(s), got {}",
            kind.as_str(),
            kind.populations(),
            tables.len()
        )));
    }
    let first = tables[0];
    for t in &tables[1..] {
        if t.years() != first.years() || t.ages() != first.ages() {
            return Err(Error::invalid(format!(
                "{}: tables {} and {} must share the same years and ages",
                kind.as_str(),
                first.population_id(),
                t.population_id()
            )));
        }
    }
    let (na, ny) = (first.n_ages(), first.n_years());
    if ny < 2 {
        return Err(Error::invalid("factor fit needs at least two years"));
    }
    let mut lambda = Vec::with_capacity(tables.len());
    for table in tables {
        let mut l = Vec::with_capacity(na);
        for x in 0..na {
            let logs: Vec<f64> = (0..ny)
                .filter(|&t| table.deaths_at(t, x) > 0.0)
                .map(|t| table.rate_at(t, x).ln())
                .collect();
            if logs.is_empty() {
                return Err(Error::invalid(format!(
                    "{}: no deaths at age {} in any year",
                    table.population_id(),
                    table.ages()[x]
                )));
            }
            l.push(logs.iter().sum::<f64>() / logs.len() as f64);
        }
        lambda.push(l);
    }
    let layout = Layout::of(kind);
    let state = State {
        kind,
        lambda,
        load: vec![vec![1.0 / na as f64; na]; layout.n_load],
        index: vec![vec![0.0; ny]; layout.index_load.len()],
    };
    let mut active = vec![false; layout.n_load];
    for &j in &layout.warm_up {
        active[j] = true;
    }
    let staged = layout.warm_up.len() < layout.n_load;
    let mut fitter = Fitter {
        layout,
        tables,
        na,
        ny,
        state,
        active,
        fitted: vec![vec![0.0; na * ny]; tables.len()],
    };
    fitter.refresh_all();
    let mut iterations = 0;
    if staged {
        iterations += fitter.run(WARM_UP_TOLERANCE, false)?;
        fitter.active = vec![true; fitter.layout.n_load];
        fitter.refresh_all();
    }
    iterations += fitter.run(TOLERANCE, true)?;
    let log_likelihood = fitter.log_likelihood();
    let populations = views(&fitter.state, tables)?;
    Ok(ModelParams::Factor(FactorParams {
        kind,
        ages: first.ages().to_vec(),
        years: first.years().to_vec(),
        populations,
        iterations,
        log_likelihood,
    }))
}

fn views(state: &State, tables: &[&MortalityTable]) -> Result<Vec<FactorPopulation>> {
    let s = state;
    let mut out = Vec::with_capacity(tables.len());
    for (pop, table) in tables.iter().enumerate() {
        let (beta, kappa, bar) = match s.kind {
            FactorKind::LeeCarter => (&s.load[0], &s.index[0], None),
            FactorKind::LiLee => (&s.load[pop], &s.index[pop], Some((&s.load[2], &s.index[2]))),
            FactorKind::Cae => (&s.load[0], &s.index[pop], Some((&s.load[1], &s.index[2 + pop]))),
        };
        let view = match bar {
            None => FactorPopulation {
                population_id: table.population_id().to_string(),
                lambda: s.lambda[pop].clone(),
                beta: beta.clone(),
                kappa: kappa.clone(),
                kappa_walk: RandomWalkSpec::estimate(kappa)?,
                bar_beta: None,
                bar_kappa: None,
                bar_kappa_walk: None,
            },
            Some((bar_beta, bar_kappa)) => {
                let (kw, bw) = RandomWalkSpec::estimate_pair(kappa, bar_kappa)?;
                FactorPopulation {
                    population_id: table.population_id().to_string(),
                    lambda: s.lambda[pop].clone(),
                    beta: beta.clone(),
                    kappa: kappa.clone(),
                    kappa_walk: kw,
                    bar_beta: Some(bar_beta.clone()),
                    bar_kappa: Some(bar_kappa.clone()),
                    bar_kappa_walk: Some(bw),
                }
            }
        };
        out.push(view);
    }
    Ok(out)
}

impl FactorParams {
    /// Re-applies the identifiability normalization (unit-sum loadings,
    /// zero-mean indices) to the stored factors.
    pub fn normalized(&self) -> FactorParams {
        let kind = self.kind;
        let pops = &self.populations;
        let (load, index) = match kind {
            FactorKind::LeeCarter => (vec![pops[0].beta.clone()], vec![pops[0].kappa.clone()]),
            FactorKind::LiLee => (
                vec![pops[0].beta.clone(), pops[1].beta.clone(), bar_beta(&pops[0])],
                vec![pops[0].kappa.clone(), pops[1].kappa.clone(), bar_kappa(&pops[0])],
            ),
            FactorKind::Cae => (
                vec![pops[0].beta.clone(), bar_beta(&pops[0])],
                vec![
                    pops[0].kappa.clone(),
                    pops[1].kappa.clone(),
                    bar_kappa(&pops[0]),
                    bar_kappa(&pops[1]),
                ],
            ),
        };
        let mut state = State {
            kind,
            lambda: pops.iter().map(|p| p.lambda.clone()).collect(),
            load,
            index,
        };
        let layout = Layout::of(kind);
        let active = vec![true; layout.n_load];
        state.normalize(&layout, &active);
        let mut out = self.clone();
        for (pop, view) in out.populations.iter_mut().enumerate() {
            view.lambda = state.lambda[pop].clone();
            match kind {
                FactorKind::LeeCarter => {
                    view.beta = state.load[0].clone();
                    view.kappa = state.index[0].clone();
                }
                FactorKind::LiLee => {
                    view.beta = state.load[pop].clone();
                    view.kappa = state.index[pop].clone();
                    view.bar_beta = Some(state.load[2].clone());
                    view.bar_kappa = Some(state.index[2].clone());
                }
                FactorKind::Cae => {
                    view.beta = state.load[0].clone();
                    view.kappa = state.index[pop].clone();
                    view.bar_beta = Some(state.load[1].clone());
                    view.bar_kappa = Some(state.index[2 + pop].clone());
                }
            }
        }
        out
    }
}

fn bar_beta(p: &FactorPopulation) -> Vec<f64> {
    p.bar_beta.clone().unwrap_or_else(|| vec![0.0; p.beta.len()])
}

fn bar_kappa(p: &FactorPopulation) -> Vec<f64> {
    p.bar_kappa.clone().unwrap_or_else(|| vec![0.0; p.kappa.len()])
}
