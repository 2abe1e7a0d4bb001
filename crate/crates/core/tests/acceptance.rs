//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are never captured.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::RngExt;
use rand_chacha::ChaCha8Rng;

use v2v_motifs::caching::{
    distance_cost, exhaustive_best_objective, influence_scores, objective_value, select_serving_location,
    select_serving_motif, zipf_pmf, DemandModel, FrequencyNormalization, Scene,
};
use v2v_motifs::geometry::Position;
use v2v_motifs::motif::{
    canonical_label, enumerate_subgraphs, z_score, CanonicalLabel, EdgeSubgraph, Motif, MotifDetector, NullModelParams,
};
use v2v_motifs::radio::{feasibility, rate, sinr_in, ChannelParams, FadingField, LinkState, RadioMap, Transmitter};
use v2v_motifs::seeds;
use v2v_motifs::simulator::{
    compute_cdf, dominance_order, run_scenario, write_cdf_csv, write_metrics_csv, ScenarioConfig, ScenarioReport,
    Strategy,
};
use v2v_motifs::temporal_graph::{decompose, MacroscopicGraph, RawEvent, TemporalEdge, TemporalGraph, VehicleId};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn rng(tag: &str) -> ChaCha8Rng {
    seeds::stream(2024, tag, &[])
}

fn v(i: u32) -> VehicleId {
    VehicleId(i)
}

// ---------------------------------------------------------------- 1

fn connected(edges: &[&TemporalEdge]) -> bool {
    let mut seen = vec![false; edges.len()];
    seen[0] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..edges.len() {
            if seen[i] {
                continue;
            }
            if (0..edges.len()).any(|j| seen[j] && edges[i].shares_vehicle(edges[j])) {
                seen[i] = true;
                changed = true;
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Every k-subset of edges, kept when edge-connected.
fn subset_oracle(g: &MacroscopicGraph, k: usize) -> BTreeSet<Vec<u32>> {
    let edges = g.edges();
    let n = edges.len();
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != k {
            continue;
        }
        let pick: Vec<&TemporalEdge> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &edges[i]).collect();
        if connected(&pick) {
            let mut labels: Vec<u32> = pick.iter().map(|e| e.label).collect();
            labels.sort();
            out.insert(labels);
        }
    }
    out
}

fn random_macroscopic_graphs(count: usize) -> Vec<MacroscopicGraph> {
    let mut r = rng("enumeration");
    let mut out = Vec::new();
    while out.len() < count {
        let cars = r.random_range(2..7u32);
        let m = r.random_range(2..12usize);
        let mut t = 0i64;
        let mut raw = Vec::new();
        for _ in 0..m {
            let a = r.random_range(0..cars);
            let mut b = r.random_range(0..cars - 1);
            if b >= a {
                b += 1;
            }
            t += r.random_range(1..40i64);
            raw.push(RawEvent::new(a, b, t));
        }
        let g = TemporalGraph::build(&raw).unwrap();
        let tc = r.random_range(5..120i64);
        for part in decompose(&g, tc).unwrap() {
            if part.len() <= 8 && out.len() < count {
                out.push(part);
            }
        }
    }
    out
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    // a->b, b->c, b->a, a->d, c->d, c->a at t = 1..6
    let fixture: Vec<RawEvent> = [(0, 1), (1, 2), (1, 0), (0, 3), (2, 3), (2, 0)]
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| RawEvent::new(a, b, i as i64 + 1))
        .collect();
    let fixture = decompose(&TemporalGraph::build(&fixture).unwrap(), 100).unwrap();
    let got: BTreeSet<Vec<u32>> = enumerate_subgraphs(&fixture[0], 3).unwrap().iter().map(|s| s.edge_labels()).collect();
    let fixture_ok = fixture.len() == 1
        && got.contains(&vec![0, 1, 2])
        && got.contains(&vec![0, 1, 5])
        && got == subset_oracle(&fixture[0], 3);

    let mut mismatches = 0;
    let mut checked = 0;
    for g in random_macroscopic_graphs(200) {
        for k in 2..=4 {
            let subs = enumerate_subgraphs(&g, k).unwrap();
            let set: BTreeSet<Vec<u32>> = subs.iter().map(|s| s.edge_labels()).collect();
            if set.len() != subs.len() || set != subset_oracle(&g, k) {
                mismatches += 1;
            }
            checked += 1;
        }
    }
    let el = start.elapsed();
    verdict(
        fixture_ok && mismatches == 0 && el < Duration::from_secs(10),
        format!("fixture {fixture_ok}, {mismatches}/{checked} (graph, k) mismatches, {el:.2?}"),
    )
}

// ---------------------------------------------------------------- 2

fn random_connected_edges(r: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    loop {
        let nodes = r.random_range(2..8u32);
        let k = r.random_range(1..8usize);
        let edges: Vec<(u32, u32)> = (0..k)
            .map(|_| {
                let a = r.random_range(0..nodes);
                let mut b = r.random_range(0..nodes - 1);
                if b >= a {
                    b += 1;
                }
                (a, b)
            })
            .collect();
        let refs: Vec<TemporalEdge> = edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| TemporalEdge { label: i as u32, src: v(a), dst: v(b), t_ms: i as i64 })
            .collect();
        if connected(&refs.iter().collect::<Vec<_>>()) {
            return edges;
        }
    }
}

fn subgraph(edges: &[(u32, u32)]) -> EdgeSubgraph {
    EdgeSubgraph::new(
        edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| TemporalEdge { label: i as u32, src: v(a), dst: v(b), t_ms: 10 * i as i64 })
            .collect(),
    )
}

/// Arc bits of a 4-node digraph after relabelling vertex i as p[i].
fn permute4(mask: u16, p: &[usize; 4]) -> u16 {
    let mut out = 0;
    for i in 0..4 {
        for j in 0..4 {
            if mask >> (4 * i + j) & 1 == 1 {
                out |= 1 << (4 * p[i] + p[j]);
            }
        }
    }
    out
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|i| (i + 1..4).all(|j| p[i] != p[j])) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut r = rng("labels");
    let mut relabel_fail = 0;
    for _ in 0..1000 {
        let edges = random_connected_edges(&mut r);
        let mut ids: Vec<u32> = Vec::new();
        while ids.len() < 8 {
            let x = r.random_range(100..1_000_000u32);
            if !ids.contains(&x) {
                ids.push(x);
            }
        }
        let mut moved: Vec<(u32, u32)> = edges.iter().map(|&(a, b)| (ids[a as usize], ids[b as usize])).collect();
        // edge order is irrelevant to the structure; rotate it too
        let shift = r.random_range(0..moved.len());
        moved.rotate_left(shift);
        if canonical_label(&subgraph(&edges)) != canonical_label(&subgraph(&moved)) {
            relabel_fail += 1;
        }
    }

    let perms = permutations4();
    let mut class_of: BTreeMap<u16, u16> = BTreeMap::new();
    let mut labels: BTreeMap<u16, BTreeSet<CanonicalLabel>> = BTreeMap::new();
    for mask in 0u16..=u16::MAX {
        if (0..4).any(|i| mask >> (5 * i) & 1 == 1) {
            continue; // self-loop
        }
        let rep = perms.iter().map(|p| permute4(mask, p)).min().unwrap();
        class_of.insert(mask, rep);
        let rows: Vec<u8> = (0..4).map(|i| (mask >> (4 * i) & 0xF) as u8).collect();
        labels.entry(rep).or_default().insert(CanonicalLabel::from_adjacency(&rows));
    }
    let classes = labels.len();
    let stable = labels.values().all(|s| s.len() == 1);
    let distinct: BTreeSet<CanonicalLabel> = labels.values().flatten().copied().collect();
    let el = start.elapsed();
    let pass =
        relabel_fail == 0 && classes == 218 && stable && distinct.len() == classes && el < Duration::from_secs(30);
    verdict(
        pass,
        format!(
            "{relabel_fail}/1000 relabel mismatches, {classes} iso classes over {} digraphs, {} distinct labels, {el:.2?}",
            class_of.len(),
            distinct.len()
        ),
    )
}

// ---------------------------------------------------------------- 3

fn motif(z: f64, instances: Vec<EdgeSubgraph>) -> Motif {
    Motif {
        label: canonical_label(&instances[0]),
        k: instances[0].len(),
        f: instances.len() as f64,
        f_ref: 0.0,
        sigma_ref: 1.0,
        z,
        instances,
    }
}

fn criterion_3() -> Verdict {
    let z = z_score(10.0, 4.0, 2.0);
    // car 7 is the influential car in 2 of 5 instances of a Z=3 motif and in
    // 4 of 5 of a Z=1 motif
    let out_star = |hub: u32| subgraph(&[(hub, 1), (hub, 2)]);
    let m1: Vec<EdgeSubgraph> = (0..5).map(|i| out_star(if i < 2 { 7 } else { 8 })).collect();
    let m2: Vec<EdgeSubgraph> = (0..5).map(|i| out_star(if i < 4 { 7 } else { 9 })).collect();
    let vehicles: BTreeSet<VehicleId> = (0..10).map(v).collect();
    let t = influence_scores(&[motif(3.0, m1), motif(1.0, m2)], &vehicles, FrequencyNormalization::Fraction).unwrap();
    let f7 = t.score(v(7));
    let pass = (z - 3.0).abs() <= 1e-12 && (f7 - 0.5).abs() <= 1e-12;
    verdict(pass, format!("Z = {z}, f(7) = {f7}"))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Verdict {
    let r11 = rate(10.0, 75e6);
    let expect = 75e6 * 11f64.log2();
    let rate_ok = ((r11 - expect) / expect).abs() <= 1e-9;

    // three V2V pairs 1 km apart along the road plus two base-station downlinks
    let params = ChannelParams { rayleigh: false, ..Default::default() };
    let pos: BTreeMap<VehicleId, Position> =
        [(0, 0.0, 1.75), (1, 50.0, 5.25), (2, 1000.0, 1.75), (3, 1030.0, 1.75), (4, 2000.0, 8.75), (5, 2080.0, 12.25)]
            .iter()
            .map(|&(i, x, y)| (v(i), Position::new(x, y)))
            .collect();
    let bs = Position::new(1000.0, 10_010.0);
    let radio = RadioMap { positions: &pos, base_station: bs, params: &params, fading: FadingField::off(), epoch: 0 };
    let specs = [
        (Transmitter::Vehicle(v(0)), v(1)),
        (Transmitter::Vehicle(v(2)), v(3)),
        (Transmitter::Vehicle(v(4)), v(5)),
        (Transmitter::BaseStation, v(1)),
        (Transmitter::BaseStation, v(3)),
    ];
    let links: Vec<LinkState> = specs.iter().map(|&(tx, rx)| radio.link(tx, rx)).collect();
    let resolved = feasibility(&links, &radio, &params);
    let final_sinr: Vec<f64> = resolved.iter().map(|l| sinr_in(l, &resolved, &radio, &params)).collect();

    // spreadsheet: g = d^-3, powers by hand
    let xy = |t: Transmitter| match t {
        Transmitter::BaseStation => (1000.0, 10_010.0),
        Transmitter::Vehicle(i) => (pos[&i].x, pos[&i].y),
    };
    let g = |t: Transmitter, rx: VehicleId| {
        let (a, b) = xy(t);
        let (c, d) = xy(Transmitter::Vehicle(rx));
        ((a - c) * (a - c) + (b - d) * (b - d)).sqrt().powi(-3)
    };
    let p = |t: Transmitter| if t == Transmitter::BaseStation { 20.0 } else { 0.1 };
    let noise = 10f64.powf(-9.4) / 1000.0;
    let sinr = |i: usize, on: &[bool]| {
        let (tx, rx) = specs[i];
        let mut interference = 0.0;
        for (j, &(tx2, rx2)) in specs.iter().enumerate() {
            if j == i || !on[j] || rx2 == rx {
                continue;
            }
            let bs_on_v2v = tx2 == Transmitter::BaseStation && tx != Transmitter::BaseStation;
            let v2v = tx2 != Transmitter::BaseStation;
            if bs_on_v2v || v2v {
                interference += p(tx2) * g(tx2, rx);
            }
        }
        p(tx) * g(tx, rx) / (interference + noise)
    };
    let gamma_bar = 10.0;
    let pass1: Vec<bool> = (0..5).map(|i| sinr(i, &[false; 5]) >= gamma_bar).collect();
    let pass2: Vec<bool> = (0..5).map(|i| pass1[i] && sinr(i, &pass1) >= gamma_bar).collect();
    let sheet: Vec<f64> = (0..5).map(|i| sinr(i, &pass2)).collect();

    let flags_ok = resolved.iter().zip(&pass2).all(|(l, &f)| l.active == f);
    let worst = final_sinr.iter().zip(&sheet).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
    let flags: String = pass2.iter().map(|&f| if f { '1' } else { '0' }).collect();
    verdict(
        rate_ok && flags_ok && worst <= 1e-12,
        format!("rate {r11:.6e} bit/s, flags {flags}, worst SINR rel. error {worst:.1e}"),
    )
}

// ---------------------------------------------------------------- 5

fn neumaier(xs: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

fn criterion_5() -> Verdict {
    let mut worst = 0.0f64;
    for theta in [0.0, 0.5, 1.0, 2.0, 4.0] {
        for m in 1..=10_000 {
            let pmf = DemandModel::new(m, 1, theta).unwrap().pmf_vec();
            worst = worst.max((neumaier(&pmf) - 1.0).abs());
        }
    }
    let p1 = zipf_pmf(1, &DemandModel::new(10, 3, 2.0).unwrap()).unwrap();
    let direct = 1.0 / (1..=10).map(|m| 1.0 / (m * m) as f64).sum::<f64>();
    let pass = worst <= 1e-12 && (p1 - 0.645258).abs() <= 1e-6 && (p1 - direct).abs() <= 1e-12;
    verdict(pass, format!("max |sum - 1| = {worst:.1e}, Pr(1) = {p1:.7}"))
}

// ---------------------------------------------------------------- 6

fn nearest_sum(pos: &[(VehicleId, Position)], mask: u32) -> f64 {
    pos.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 0)
        .map(|(_, (_, a))| {
            pos.iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, (_, b))| a.distance(b))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let mut r = rng("placement");
    let params = ChannelParams { rayleigh: false, ..Default::default() };
    let demand = DemandModel::default();
    let detector =
        MotifDetector { null_model: NullModelParams { samples: 20, ..Default::default() }, ..Default::default() };
    let (mut bad_bound, mut bad_location, mut with_motifs) = (0, 0, 0);
    for inst in 0..50 {
        let n = r.random_range(3..=10usize);
        let c = r.random_range(1..n);
        let positions: BTreeMap<VehicleId, Position> = (0..n as u32)
            .map(|i| (v(i), Position::new(r.random_range(0.0..2000.0), r.random_range(0.0..21.0))))
            .collect();
        let ordered: Vec<(VehicleId, Position)> = positions.iter().map(|(&k, &p)| (k, p)).collect();
        let scene = Scene {
            positions: &positions,
            base_station: Position::new(1000.0, 10_010.5),
            params: &params,
            demand: &demand,
            fading: FadingField::off(),
            epoch: 0,
        };

        let mut best_obj = f64::NEG_INFINITY;
        let mut best_dist = f64::INFINITY;
        let mut dist_of: Vec<(f64, u32)> = Vec::new();
        for mask in 0u32..1 << n {
            if mask.count_ones() as usize != c {
                continue;
            }
            let set: BTreeSet<VehicleId> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ordered[i].0).collect();
            best_obj = best_obj.max(objective_value(&set, &scene).unwrap());
            let d = nearest_sum(&ordered, mask);
            best_dist = best_dist.min(d);
            dist_of.push((d, mask));
        }

        let location = select_serving_location(&positions, c).unwrap();
        let obj_loc = objective_value(&location, &scene).unwrap();
        let d_loc = distance_cost(&positions, &location).unwrap();
        let minimizers: Vec<u32> = dist_of
            .iter()
            .filter(|(d, _)| (d - best_dist).abs() <= 1e-9 * best_dist.max(1.0))
            .map(|&(_, m)| m)
            .collect();
        let loc_mask: u32 =
            ordered.iter().enumerate().filter(|(_, (id, _))| location.contains(id)).map(|(i, _)| 1 << i).sum();
        if (d_loc - best_dist).abs() > 1e-9 * best_dist.max(1.0) || !minimizers.contains(&loc_mask) {
            bad_location += 1;
        }

        // motif heuristic on random chatter among the same cars
        let mut raw = Vec::new();
        let mut t = 0;
        for _ in 0..r.random_range(6..30) {
            let a = r.random_range(0..n as u32);
            let mut b = r.random_range(0..n as u32 - 1);
            if b >= a {
                b += 1;
            }
            t += r.random_range(1..20_000i64);
            raw.push(RawEvent::new(a, b, t));
        }
        let graphs = decompose(&TemporalGraph::build(&raw).unwrap(), 100_000).unwrap();
        let det = MotifDetector {
            null_model: NullModelParams { rng_seed: inst, ..detector.null_model.clone() },
            ..detector.clone()
        };
        let motifs = det.detect(&graphs).unwrap();
        let motif_set =
            match influence_scores(&motifs, &positions.keys().copied().collect(), FrequencyNormalization::Fraction) {
                Ok(table) => {
                    with_motifs += 1;
                    select_serving_motif(&table, c).unwrap()
                }
                Err(_) => location.clone(),
            };
        let obj_motif = objective_value(&motif_set, &scene).unwrap();
        let (_, lib_best) = exhaustive_best_objective(&scene, c).unwrap();
        let tol = 1e-12 * best_obj.abs();
        if obj_loc > best_obj + tol || obj_motif > best_obj + tol || (lib_best - best_obj).abs() > tol {
            bad_bound += 1;
        }
    }
    let el = start.elapsed();
    verdict(
        bad_bound == 0 && bad_location == 0 && el < Duration::from_secs(60),
        format!(
            "{bad_bound} bound violations, {bad_location} location mismatches, {with_motifs}/50 with motifs, {el:.2?}"
        ),
    )
}

// ---------------------------------------------------------------- 7-9

struct Runs {
    s1: ScenarioReport,
    s2: ScenarioReport,
    elapsed: Duration,
    s2_files: (Vec<u8>, Vec<u8>),
}

fn files(report: &ScenarioReport) -> (Vec<u8>, Vec<u8>) {
    let (mut m, mut c) = (Vec::new(), Vec::new());
    write_metrics_csv(&mut m, &report.metrics).unwrap();
    write_cdf_csv(&mut c, &report.cdfs).unwrap();
    (m, c)
}

fn scenario_2() -> ScenarioConfig {
    ScenarioConfig { scenario: 2, car_sets: vec![41], ..Default::default() }
}

fn scenario_runs() -> Runs {
    let start = Instant::now();
    let s1 = run_scenario(&ScenarioConfig::default()).unwrap();
    let s2 = run_scenario(&scenario_2()).unwrap();
    let elapsed = start.elapsed();
    let s2_files = files(&s2);
    Runs { s1, s2, elapsed, s2_files }
}

fn criterion_7(runs: &Runs) -> Verdict {
    let s = &runs.s1.summary;
    let wins = s.iter().filter(|p| p.advantage > 0.0).count();
    let best = s.iter().map(|p| p.advantage).fold(f64::NEG_INFINITY, f64::max);
    let s2 = runs.s2.summary.iter().find(|p| p.serving_count == 11).expect("11-serving point");
    let frac = wins as f64 / s.len() as f64;
    let pass = frac >= 0.6 && best >= 0.10 && s2.advantage >= 0.0 && runs.elapsed < Duration::from_secs(600);
    let per_point: Vec<String> =
        s.iter().map(|p| format!("{}:{:+.1}%", p.serving_count, 100.0 * p.advantage)).collect();
    verdict(
        pass,
        format!(
            "scenario 1 motif wins {wins}/{} points, best advantage {:+.1}% [{}]; scenario 2 at 11 serving {:+.1}%; {:.0?}",
            s.len(),
            100.0 * best,
            per_point.join(" "),
            100.0 * s2.advantage,
            runs.elapsed
        ),
    )
}

fn criterion_8(runs: &Runs) -> Verdict {
    let again = run_scenario(&scenario_2()).unwrap();
    let same = files(&again) == runs.s2_files;
    verdict(same, format!("metric and CDF bytes identical on rerun: {same}"))
}

fn criterion_9(runs: &Runs) -> Verdict {
    let mut valid = true;
    let (mut consistent, mut points) = (0, 0);
    for report in [&runs.s1, &runs.s2] {
        let mut groups: BTreeMap<(usize, String), Vec<(f64, f64)>> = BTreeMap::new();
        for row in &report.cdfs {
            groups.entry((row.serving_count, row.strategy.to_string())).or_default().push((row.rate_bps, row.cdf));
        }
        for g in groups.values() {
            valid &= g.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
            valid &= (g.last().unwrap().1 - 1.0).abs() <= 1e-12;
        }
        for s in &report.summary {
            let pooled = |st: Strategy| -> Vec<f64> {
                report
                    .points
                    .iter()
                    .filter(|p| p.sweep_point == s.sweep_point)
                    .flat_map(|p| p.outcome(st).per_car.values().copied().collect::<Vec<_>>())
                    .collect()
            };
            let dom = dominance_order(
                &compute_cdf(&pooled(Strategy::Motif)).unwrap(),
                &compute_cdf(&pooled(Strategy::Location)).unwrap(),
            );
            let mean = s.mean_motif_bps.partial_cmp(&s.mean_location_bps).unwrap_or(Ordering::Equal);
            points += 1;
            if dom == mean && dom == s.dominance {
                consistent += 1;
            }
        }
    }
    let frac = consistent as f64 / points as f64;
    verdict(
        valid && frac >= 0.8,
        format!("CDFs valid: {valid}; dominance agrees with mean order at {consistent}/{points} points"),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut line = |n: usize, v: Verdict| {
        println!("criterion {n}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    };
    line(1, criterion_1());
    line(2, criterion_2());
    line(3, criterion_3());
    line(4, criterion_4());
    line(5, criterion_5());
    line(6, criterion_6());
    let runs = scenario_runs();
    line(7, criterion_7(&runs));
    line(8, criterion_8(&runs));
    line(9, criterion_9(&runs));
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
