//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! The binary exits 0 even when a criterion fails so that the report is
//! always produced as part of `cargo test`; set `STT_STRICT=1` to turn any
//! failure into a non-zero exit.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stt::engine::cost::{cost_to_go, Lagrangian};
use stt::engine::{AwardRule, Engine, EngineConfig, EventKind, Phase, StoneSchedule};
use stt::gridworld::{generate_world, CellCoord, CellKind, Direction, GridWorld};
use stt::harness::export::report_csv;
use stt::harness::metrics::sign_test;
use stt::harness::{build_scenario, run_baseline, run_experiment, RunConfig};
use stt::levy::{estimate_tail_index, sample_displacement, sample_magnitude, LevyParams};
use stt::stdp::{kernel, SpikeEvent, StdpParams, SynapseMatrix};
use stt::trailmap::{MarkerKind, TrailMap, TrailParams};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn default_seeds() -> RunConfig {
    let cfg = RunConfig::default();
    assert_eq!(cfg.seeds.len(), 50);
    cfg
}

fn teaching_exactness() -> Outcome {
    let start = Instant::now();
    let mut cfg = default_seeds();
    cfg.teaching = true;
    cfg.stones = StoneSchedule::FirstEpisode;
    cfg.tolerance = 0.0;
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?.report;
    let elapsed = start.elapsed();
    let misses: Vec<u64> = report.runs.iter().filter(|r| r.match_rate != 1.0).map(|r| r.seed).collect();
    ensure(misses.is_empty(), || format!("seeds below 1.0: {misses:?}"))?;
    within_time(elapsed, Duration::from_secs(30))?;
    Ok(format!("{} seeds at 1.0 in {elapsed:.2?}", report.runs.len()))
}

fn superiority_over_baseline() -> Outcome {
    let start = Instant::now();
    let mut cfg = default_seeds();
    cfg.teaching = false;
    cfg.tolerance = 1.0;
    let stt = run_experiment(&cfg).map_err(|e| e.to_string())?.report;
    let base = run_baseline(&cfg).map_err(|e| e.to_string())?.report;
    let elapsed = start.elapsed();
    let test = sign_test(&stt.match_rates(), &base.match_rates());
    let (m_stt, m_base) = (stt.mean_match_rate(), base.mean_match_rate());
    let detail = format!(
        "stt mean {m_stt:.4}, baseline mean {m_base:.4}, wins {} losses {} ties {}, p = {:.4}; \
         stt mean {} 0.96; {elapsed:.2?}",
        test.wins,
        test.losses,
        test.ties,
        test.p_value,
        if m_stt >= 0.96 { ">=" } else { "<" }
    );
    ensure(m_stt > m_base && test.p_value < 0.05, || detail.clone())?;
    within_time(elapsed, Duration::from_secs(120))?;
    Ok(detail)
}

fn tail_fidelity() -> Outcome {
    let start = Instant::now();
    let n = 100_000;
    let mut parts = Vec::new();
    for (i, lambda) in [1.5, 2.0, 2.5].into_iter().enumerate() {
        let p = LevyParams::untruncated(lambda, 1.0, 1.0).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let samples: Vec<f64> = (0..n).map(|_| sample_magnitude(&p, &mut rng)).collect();
        let est = estimate_tail_index(&samples, n / 100).map_err(|e| e.to_string())?;
        ensure((est.lambda - lambda).abs() <= 0.15, || {
            format!("lambda {lambda}: estimate {:.4}", est.lambda)
        })?;
        parts.push(format!("{lambda} -> {:.3}", est.lambda));
    }
    let elapsed = start.elapsed();
    within_time(elapsed, Duration::from_secs(5))?;
    Ok(format!("{} in {elapsed:.2?}", parts.join(", ")))
}

fn alpha_linearity() -> Outcome {
    let one = LevyParams::new(1.5, 1.0, 1.0, 45.0).map_err(|e| e.to_string())?;
    let two = one.with_alpha(2.0).map_err(|e| e.to_string())?;
    let mut r1 = ChaCha8Rng::seed_from_u64(77);
    let mut r2 = ChaCha8Rng::seed_from_u64(77);
    for i in 0..10_000 {
        let (d1, m1) = sample_displacement(&one, &mut r1);
        let (d2, m2) = sample_displacement(&two, &mut r2);
        ensure(d1 == d2 && m2 == 2.0 * m1, || format!("draw {i}: {d1:?} {m1} vs {d2:?} {m2}"))?;
    }
    Ok("10000 draws exact".into())
}

fn stdp_oracle() -> Outcome {
    let p = StdpParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut m = SynapseMatrix::zeros(3, 2, p).map_err(|e| e.to_string())?;
    let mut naive = [[0.0f64; 2]; 3];
    for _ in 0..100 {
        let (pre, post) = (rng.gen_range(0..3), rng.gen_range(0..2));
        let (tp, tq) = (rng.gen_range(0..40u64), rng.gen_range(0..40u64));
        m.apply_pair(SpikeEvent::new(pre, tp), SpikeEvent::new(post, tq))
            .map_err(|e| e.to_string())?;
        let dt = tq as f64 - tp as f64;
        let dw = if dt > 0.0 {
            p.a_plus * (-dt / p.tau_plus).exp()
        } else if dt < 0.0 {
            -p.a_minus * (dt / p.tau_minus).exp()
        } else {
            0.0
        };
        naive[pre][post] = (naive[pre][post] + dw).clamp(p.w_min, p.w_max);
    }
    let mut worst = 0.0f64;
    for (i, row) in naive.iter().enumerate() {
        for (j, &want) in row.iter().enumerate() {
            let got = m.weight(i, j);
            let rel = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
            worst = worst.max(rel);
        }
    }
    ensure(worst <= 1e-12, || format!("relative error {worst:e}"))?;
    let (plus, minus) = (kernel(5, &p), kernel(-5, &p));
    ensure((plus - 0.1 * (-0.25f64).exp()).abs() <= 1e-9, || format!("dw(+5) = {plus}"))?;
    ensure((minus + 0.12 * (-0.25f64).exp()).abs() <= 1e-9, || format!("dw(-5) = {minus}"))?;
    Ok(format!("max rel err {worst:.1e}; dw(+5) = {plus:.9}, dw(-5) = {minus:.9}"))
}

/// Shortest 8-connected passable path from HOME to the nearest forest cell.
fn path_to_forest(w: &GridWorld) -> Option<Vec<CellCoord>> {
    let size = w.size();
    let mut prev = vec![None; size * size];
    let mut queue = VecDeque::from([w.home()]);
    prev[w.home().y * size + w.home().x] = Some(w.home());
    while let Some(c) = queue.pop_front() {
        if w.kind(c) == CellKind::Forest {
            let mut path = vec![c];
            let mut at = c;
            while at != w.home() {
                at = prev[at.y * size + at.x].unwrap();
                path.push(at);
            }
            path.reverse();
            return Some(path);
        }
        for d in Direction::ALL {
            if let Some(n) = c.step(d, size).filter(|&n| w.is_passable(n)) {
                if prev[n.y * size + n.x].is_none() {
                    prev[n.y * size + n.x] = Some(c);
                    queue.push_back(n);
                }
            }
        }
    }
    None
}

fn trail_semantics() -> Outcome {
    let mut t = TrailMap::new(4, TrailParams::default());
    let stone = CellCoord::new(1, 1);
    t.drop_marker(stone, MarkerKind::Stone, 0, 0).map_err(|e| e.to_string())?;
    for _ in 0..10_000 {
        t.decay_tick();
    }
    ensure(t.strength(stone) == 1.0, || format!("stone at {}", t.strength(stone)))?;

    let crumb = CellCoord::new(2, 2);
    t.drop_marker(crumb, MarkerKind::Crumb, 0, 1).map_err(|e| e.to_string())?;
    let mut gone_at = None;
    for tick in 1..=20 {
        t.decay_tick();
        if t.marker(crumb).is_none() {
            gone_at = Some(tick);
            break;
        }
    }
    ensure(gone_at == Some(7), || format!("crumb vanished at {gone_at:?}"))?;

    let mut replays = 0;
    for seed in 0..20 {
        let w = generate_world(32, 6, seed).map_err(|e| e.to_string())?;
        let Some(script) = path_to_forest(&w) else { continue };
        let mut e = Engine::init_run(&w, EngineConfig::for_grid(32), seed).map_err(|e| e.to_string())?;
        e.teach_episode(&script).map_err(|e| e.to_string())?;
        let rec = e.finish();
        let back: Vec<CellCoord> = rec
            .trace
            .iter()
            .filter(|t| t.phase == Phase::TrailReturn)
            .map(|t| t.position)
            .collect();
        let want: Vec<CellCoord> = script.iter().rev().skip(1).copied().collect();
        ensure(back == want, || format!("world {seed}: return differs from the reversed outbound"))?;
        replays += 1;
    }
    ensure(replays > 0, || "no world had a path to the forest".into())?;
    Ok(format!("stone 1.0 after 10^4 ticks, crumb gone at tick 7, {replays} exact replays"))
}

fn cost_oracle() -> Outcome {
    let s = build_scenario(&RunConfig::default()).map_err(|e| e.to_string())?;
    let w = &s.world;
    let l = Lagrangian { beta: 1.5, gamma: 2.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let len = rng.gen_range(2..120);
        let mut trace = vec![w.home()];
        while trace.len() < len {
            let d = Direction::ALL[rng.gen_range(0..8)];
            if let Some(n) = trace.last().unwrap().step(d, w.size()) {
                trace.push(n);
            }
        }
        let mut naive = 0.0;
        for pair in trace.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let dist = ((b.x as f64 - a.x as f64).powi(2) + (b.y as f64 - a.y as f64).powi(2)).sqrt();
            let blocked = (-1i64..=1)
                .flat_map(|dy| (-1i64..=1).map(move |dx| (dx, dy)))
                .filter(|&o| o != (0, 0))
                .filter_map(|(dx, dy)| b.offset(dx, dy, w.size()))
                .any(|n| matches!(w.kind(n), CellKind::Mountain | CellKind::Obstacle));
            let mark = match w.kind(b) {
                CellKind::Palace => 1.0,
                CellKind::Ogre => -1.0,
                _ => 0.0,
            };
            naive += dist + l.beta * if blocked { 1.0 } else { 0.0 } - l.gamma * mark;
        }
        let got = cost_to_go(&trace, w, &l).value;
        let rel = if naive == 0.0 { got.abs() } else { ((got - naive) / naive).abs() };
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-12, || format!("relative error {worst:e}"))?;
    let single = cost_to_go(&[w.home()], w, &l);
    ensure(single.value == 0.0, || format!("single point cost {}", single.value))?;
    Ok(format!("100 traces, max rel err {worst:.1e}; single point 0"))
}

fn determinism() -> Outcome {
    let mut bytes = 0;
    for teaching in [true, false] {
        let mut cfg = default_seeds();
        cfg.teaching = teaching;
        let a = report_csv(&run_experiment(&cfg).map_err(|e| e.to_string())?.report);
        let b = report_csv(&run_experiment(&cfg).map_err(|e| e.to_string())?.report);
        ensure(a == b, || format!("CSV differs (teaching {teaching})"))?;
        bytes += a.len();
    }
    Ok(format!("identical CSV bytes ({bytes} bytes over two configs)"))
}

fn random_engine_config(rng: &mut ChaCha8Rng, size: usize) -> EngineConfig {
    let mut cfg = EngineConfig::for_grid(size);
    let alpha = [0.0, 0.5, 1.0, 2.0, 3.0][rng.gen_range(0..5)];
    cfg.levy = LevyParams::new(rng.gen_range(1.1..3.0), alpha, 1.0, rng.gen_range(2.0..2.0 * size as f64)).unwrap();
    cfg.epsilon = rng.gen_range(0.0..1.0);
    cfg.stones = [StoneSchedule::FirstEpisode, StoneSchedule::Always, StoneSchedule::Never][rng.gen_range(0..3)];
    cfg.award = match rng.gen_range(0..4) {
        0 => AwardRule::Infinity,
        1 => AwardRule::Fixed(rng.gen_range(0.0..5.0)),
        2 => AwardRule::Fixed(0.0),
        _ => AwardRule::Bernoulli {
            p: rng.gen_range(0.0..1.0),
            value: 10.0,
        },
    };
    cfg.stdp.forget_factor = rng.gen_range(0.5..1.0);
    cfg.tick_budget = Some(rng.gen_range(2..300));
    cfg.max_episodes = rng.gen_range(1..5);
    cfg
}

fn state_machine_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut ogres, mut awards, mut timeouts) = (0, 0, 0);
    for run in 0..1000 {
        let size = rng.gen_range(8..24);
        let n_mountains = rng.gen_range(0..=size * size / 16);
        let w = generate_world(size, n_mountains, rng.gen()).map_err(|e| e.to_string())?;
        let cfg = random_engine_config(&mut rng, size);
        let budget = cfg.tick_budget.unwrap();
        let alpha0 = cfg.levy.alpha();
        let mut e = Engine::init_run(&w, cfg, rng.gen()).map_err(|e| format!("run {run}: {e}"))?;
        let mut wallet_changes = 0;
        let mut wallet = e.state().wallet;
        while !e.is_finished() {
            e.run_episode().map_err(|err| format!("run {run}: {err}"))?;
            if e.state().wallet != wallet {
                wallet_changes += 1;
                wallet = e.state().wallet;
            }
        }
        ensure(wallet_changes <= 1, || format!("run {run}: wallet changed {wallet_changes} times"))?;
        let alphas = e.alpha_history().to_vec();
        let rec = e.finish();
        rec.validate().map_err(|m| format!("run {run}: {m}"))?;
        ensure(alphas.len() == rec.trace.len(), || format!("run {run}: alpha history length"))?;
        ensure(rec.count(EventKind::Award) <= 1 || rec.final_wallet == 0.0, || {
            format!("run {run}: paid twice with a non-empty wallet")
        })?;

        let starts: Vec<usize> = (0..rec.trace.len())
            .filter(|&i| rec.trace[i].phase == Phase::Outbound && (i == 0 || rec.trace[i - 1].phase != Phase::Outbound))
            .collect();
        ensure(starts.len() as u32 == rec.episodes, || format!("run {run}: episode count"))?;
        for (k, &s) in starts.iter().enumerate() {
            let end = starts.get(k + 1).copied().unwrap_or(rec.trace.len());
            let span = rec.trace[end - 1].tick - rec.trace[s].tick;
            ensure(span <= budget, || format!("run {run}: episode {k} spans {span} > budget {budget}"))?;
            ensure(alphas[s] == alpha0, || format!("run {run}: episode {k} starts at alpha {}", alphas[s]))?;
            for i in s + 1..end {
                ensure(alphas[i] >= alphas[i - 1], || format!("run {run}: alpha decreased at tick {}", rec.trace[i].tick))?;
                if alphas[i] > alphas[i - 1] {
                    let tick = rec.trace[i].tick;
                    let at_ogre = rec.events.iter().any(|ev| ev.tick == tick && ev.kind == EventKind::OgreReached);
                    ensure(at_ogre, || format!("run {run}: alpha rose at tick {tick} without the ogre"))?;
                }
            }
        }
        let last = rec.trace.last().unwrap();
        ensure(last.phase == Phase::Done || rec.count(EventKind::HomeReached) > 0, || {
            format!("run {run}: ended mid-walk")
        })?;
        ogres += rec.count(EventKind::OgreReached);
        awards += rec.count(EventKind::Award);
        timeouts += rec.count(EventKind::Timeout);
    }
    Ok(format!(
        "1000 runs sound ({ogres} ogre, {awards} award, {timeouts} timeout events) in {:.2?}",
        start.elapsed()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("teaching-session exactness", teaching_exactness),
        ("superiority over the random baseline", superiority_over_baseline),
        ("Levy tail fidelity", tail_fidelity),
        ("step-size linearity", alpha_linearity),
        ("STDP oracle equivalence", stdp_oracle),
        ("trail semantics", trail_semantics),
        ("cost-to-go oracle", cost_oracle),
        ("determinism", determinism),
        ("state-machine soundness", state_machine_soundness),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("STT_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
