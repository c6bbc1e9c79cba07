// Scratch harness: replicate the synthetic-table settings under candidate
// mechanism readings to pin internal constants. Not part of the artifact.

use electsim::election::{decide_outcome, ElectorateSpec};
use electsim::models::*;
use electsim::TallyMatrix;
use rayon::prelude::*;

fn mean_seats(f: impl Fn(u64) -> TallyMatrix + Sync, spec: &ElectorateSpec, reps: u64) -> Vec<f64> {
    let k = spec.num_parties();
    let seats: Vec<Vec<u64>> = (0..reps)
        .into_par_iter()
        .map(|r| decide_outcome(&f(r), spec).unwrap().seats)
        .collect();
    let mut mean = vec![0.0; k];
    for s in &seats {
        for i in 0..k {
            mean[i] += s[i] as f64 / reps as f64;
        }
    }
    mean
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("all");
    let reps: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(30);
    let n: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);

    let thetas = [
        vec![0.5, 0.4, 0.1],
        vec![0.4, 0.3, 0.3],
        vec![0.4, 0.35, 0.25],
        vec![0.37, 0.33, 0.3],
    ];

    if mode == "all" || mode == "dm" {
        println!("== DM (paper: 54/41/5, 44/29/29*?, 43/35/22*?, 39/33/28*? rows 1-4 of table 1 col gamma=0.8 header is DM) ==");
        // Table 1 rows 1-4 are DM: (54,41,5), (44,29,29), (43,35,22), (39,33,28)
        for theta in &thetas {
            let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
            let m = mean_seats(|r| simulate_dm(&spec, r).unwrap(), &spec, reps);
            println!("theta {:?} -> {:.1?}", theta, m);
        }
    }

    if mode == "all" || mode == "dpm" {
        println!("== DPM (paper g=0.8: 78/22/0, 66/17/17, 61/32/7, 50/30/20 | g=0.9: 60/35/5, 48/26/26, 47/34/19, 41/33/26) ==");
        for g in [0.8, 0.9] {
            for theta in &thetas {
                let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
                let p = DpmParams::shared(g);
                let m = mean_seats(|r| simulate_dpm(&spec, &p, r).unwrap(), &spec, reps);
                println!("gamma {g} theta {:?} -> {:.1?}", theta, m);
            }
        }
    }

    if mode == "all" || mode == "ecm" {
        println!("== ECM per-district dishes (paper a=20,b=0.5: 70/30/0 .. | a=50,b=0.5: 78/22/0, 70/15/15, 62/34/4, 53/29/18 | a=50,b=0.8: 51/48/1 ..) ==");
        for (a, b) in [(20.0, 0.5), (20.0, 0.8), (50.0, 0.5), (50.0, 0.8)] {
            for theta in &thetas {
                let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
                let p = EcmParams { alpha: a, beta: b };
                let m = mean_seats(|r| simulate_ecm(&spec, &p, r).unwrap(), &spec, reps);
                println!("a {a} b {b} theta {:?} -> {:.1?}", theta, m);
            }
        }
        println!("== ECM global dishes, same settings ==");
        for (a, b) in [(20.0, 0.5), (50.0, 0.5), (50.0, 0.8)] {
            let spec = ElectorateSpec::equal_districts(100, n, thetas[0].clone()).unwrap();
            let p = EcmParams { alpha: a, beta: b };
            let m = mean_seats(
                |r| simulate_ecm_with_global_dishes(&spec, &p, r).unwrap(),
                &spec,
                reps,
            );
            println!("a {a} b {b} theta {:?} -> {:.1?}", thetas[0], m);
        }
    }

    if mode == "us16" {
        let obs = electsim::io::load_observed("data/us2016.csv").unwrap();
        println!("theta {:?}", obs.spec.popularity());
        let out = decide_outcome(&obs.tally, &obs.spec).unwrap();
        println!("actual seats {:?}", out.seats);
        let p = PcmParams { eta: vec![0.99, 0.02] };
        let mut counts: std::collections::HashMap<Vec<u64>, u32> = Default::default();
        for r in 0..10u64 {
            let tally = simulate_pcm(&obs.spec, &p, 1000 + r).unwrap();
            let seats = decide_outcome(&tally, &obs.spec).unwrap().seats;
            let summ = electsim::summarize(&tally, &obs.spec).unwrap();
            println!("run {r}: seats {:?} mwm {:.3} swm {:.3}", seats, summ.margin_mean, summ.margin_std);
            *counts.entry(seats).or_default() += 1;
        }
        let modal = counts.iter().max_by_key(|(s, c)| (**c, std::cmp::Reverse(s.clone()))).unwrap();
        println!("modal {:?} x{}", modal.0, modal.1);
    }

    if mode == "delhi" || mode == "odisha" {
        use electsim::abc::{abc_explore_exploit, AbcConfig, ModelTarget, PriorSpec};
        let path = if mode == "delhi" { "data/delhi2015.csv" } else { "data/odisha2019_1.csv" };
        let obs = electsim::io::load_observed(path).unwrap();
        println!("theta {:?}", obs.spec.popularity());
        let observed = obs.summary();
        println!("observed seats {:?} mwm {:.3} swm {:.3}",
            decide_outcome(&obs.tally, &obs.spec).unwrap().seats, observed.margin_mean, observed.margin_std);
        let target = ModelTarget::new(obs.spec.clone(), ModelParams::Pcm(PcmParams { eta: vec![0.5; 3] }));
        let prior = PriorSpec::uniform(&[("eta_0", 0.0, 1.0), ("eta_1", 0.0, 1.0), ("eta_2", 0.0, 1.0)]);
        let config = AbcConfig {
            explore_budget: 120,
            seed_count: 8,
            exploit_budget: 20,
            max_rounds: 6,
            acceptance_eps: 0.05,
            target_accepted: 40,
            replicas_per_candidate: 3,
            ..AbcConfig::default()
        };
        let t0 = std::time::Instant::now();
        let result = abc_explore_exploit(&target, &observed, &prior, &config, 99).unwrap();
        println!("psi_opt {:?} dist {:.4} evals {} accepted {} ({:?})",
            result.psi_opt, result.psi_opt_distance, result.evaluations_used,
            result.accepted.len(), t0.elapsed());
        // re-simulate at psi_opt over `reps` replicas
        let params = target.params_for(&result.psi_opt).unwrap();
        let k = obs.spec.num_parties();
        let mut mean = vec![0.0; k];
        let mut mwm = 0.0;
        for r in 0..reps {
            let tally = electsim::simulate(&obs.spec, &params, 5000 + r).unwrap();
            let out = decide_outcome(&tally, &obs.spec).unwrap();
            for i in 0..k { mean[i] += out.seats[i] as f64 / reps as f64; }
            mwm += electsim::summarize(&tally, &obs.spec).unwrap().margin_mean / reps as f64;
        }
        println!("resim mean seats {:.1?} mwm {:.3}", mean, mwm);
    }

    if mode == "sim" {
        // Table-4 polarized scenario, C=3: want mean seats ~(43,57,0),
        // emergent shares ~(0.34,0.34,0.32), spread ~3.
        let alphas: Vec<f64> = args.get(4).map(|s| s.split(',').map(|x| x.parse().unwrap()).collect()).unwrap_or(vec![0.9]);
        for a in alphas {
            let spec = ElectorateSpec::equal_districts(100, n, vec![1.0/3.0; 3]).unwrap();
            let p = SimParams::individual(
                vec![0.5, 0.3, 0.2],
                vec![vec![1, -1, 0], vec![-1, 1, 0], vec![-1, 1, 0]],
                vec![1.0, 1.0, 2.0],
                a,
            );
            let k = 3;
            let mut mean = vec![0.0; k];
            let mut zero_c = 0u32;
            let mut mvf = vec![0.0; k];
            let mut lo = vec![u64::MAX; k];
            let mut hi = vec![0u64; k];
            for r in 0..reps {
                let tally = simulate_sim(&spec, &p, r).unwrap();
                let out = decide_outcome(&tally, &spec).unwrap();
                let st = electsim::summarize(&tally, &spec).unwrap();
                for i in 0..k {
                    mean[i] += out.seats[i] as f64 / reps as f64;
                    mvf[i] += st.mean_vote_fraction[i] / reps as f64;
                    lo[i] = lo[i].min(out.seats[i]);
                    hi[i] = hi[i].max(out.seats[i]);
                }
                if out.seats[2] == 0 { zero_c += 1; }
            }
            println!("alpha_crp {a}: seats {:.1?} lo {:?} hi {:?} zero-C {}/{} shares {:.3?}",
                mean, lo, hi, zero_c, reps, mvf);
        }
    }

    if mode == "simdiag" {
        let alpha: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0.9);
        let spec = ElectorateSpec::equal_districts(100, n, vec![1.0/3.0; 3]).unwrap();
        let p = SimParams::individual(
            vec![0.5, 0.3, 0.2],
            vec![vec![1, -1, 0], vec![-1, 1, 0], vec![-1, 1, 0]],
            vec![1.0, 1.0, 2.0],
            alpha,
        );
        for r in 0..3u64 {
            let (tally, trace) = simulate_sim_traced(&spec, &p, r).unwrap();
            let out = decide_outcome(&tally, &spec).unwrap();
            // per-community district histograms
            for c in 0..3 {
                let hist = community_histogram(&trace, c).unwrap();
                let total: u64 = hist.iter().sum();
                let n_bar = total / 100;
                let mut sorted: Vec<u64> = hist.clone();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                let strongholds = hist.iter().filter(|&&h| h > 2 * n_bar).count();
                println!(
                    "run {r} comm {c}: total {total} strongholds(>2x mean) {strongholds} top5 {:?}",
                    &sorted[..5]
                );
            }
            println!("run {r}: seats {:?}", out.seats);
        }
    }

    if mode == "pcmp" {
        println!("== PCM pinned mixing, all table cells ==");
        let cases: Vec<(Vec<f64>, Vec<f64>, &str)> = vec![
            (vec![0.99, 0.50, 0.50], thetas[0].clone(), "53/47/0"),
            (vec![0.99, 0.50, 0.50], thetas[1].clone(), "50/25/25"),
            (vec![0.99, 0.50, 0.50], thetas[2].clone(), "45/55/0"),
            (vec![0.99, 0.50, 0.50], thetas[3].clone(), "45/51/4"),
            (vec![0.50, 0.99, 0.50], thetas[0].clone(), "68/32/0"),
            (vec![0.50, 0.99, 0.50], thetas[1].clone(), "72/28/0"),
            (vec![0.50, 0.99, 0.50], thetas[2].clone(), "67/33/0"),
            (vec![0.50, 0.99, 0.50], thetas[3].clone(), "66/34/0"),
            (vec![0.50, 0.99, 0.99], thetas[0].clone(), "69/31/0"),
            (vec![0.50, 0.50, 0.99], thetas[0].clone(), "100/0/0"),
            (vec![0.50, 0.50, 0.99], thetas[1].clone(), "72/0/28"),
            (vec![0.50, 0.50, 0.99], thetas[2].clone(), "78/2/20"),
            (vec![0.99, 0.99, 0.50], thetas[0].clone(), "56/42/2"),
            (vec![0.99, 0.50, 0.99], thetas[0].clone(), "51/48/1"),
            (vec![0.99, 0.99, 0.99], thetas[0].clone(), "~50/40/10"),
            (vec![0.50, 0.50, 0.50], thetas[0].clone(), "~100/0/0"),
        ];
        for (eta, theta, want) in &cases {
            let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
            let pp = PcmParams { eta: eta.clone() };
            let m = mean_seats(|r| simulate_pcm(&spec, &pp, r).unwrap(), &spec, reps);
            println!("eta {:?} theta {:?} -> {:.1?} (want {want})", eta, theta, m);
        }
    }

    if mode == "pcm3" {
        // Just the two gated cells, over a (p, frac) grid.
        let gated: Vec<(Vec<f64>, Vec<f64>, &str)> = vec![
            (vec![0.99, 0.50, 0.50], thetas[2].clone(), "45/55/0 +-6"),
            (vec![0.50, 0.50, 0.99], thetas[0].clone(), "100/0/0 +-3"),
        ];
        let ps: Vec<f64> = args.get(4).map(|s| s.split(',').map(|x| x.parse().unwrap()).collect()).unwrap_or(vec![1.0]);
        let fr: Vec<f64> = args.get(5).map(|s| s.split(',').map(|x| x.parse().unwrap()).collect()).unwrap_or(vec![0.4]);
        for &p in &ps {
            for &frac in &fr {
                print!("p {p} frac {frac}: ");
                for (eta, theta, want) in &gated {
                    let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
                    let pp = PcmParams { eta: eta.clone() };
                    let m = mean_seats(
                        |r| simulate_pcm_with_mixing_power_damped(&spec, &pp, r, p, frac).unwrap(),
                        &spec,
                        reps,
                    );
                    print!("{:.1?} (want {want}) | ", m);
                }
                println!();
            }
        }
    }

    if mode == "all" || mode == "pcm" {
        // Table 3 checkpoints:
        //   eta (.99,.50,.50) theta (.5,.4,.1) -> 53/47/0 ; theta (.4,.35,.25) -> 45/55/0
        //   eta (.50,.99,.50) theta (.5,.4,.1) -> 68/32/0
        //   eta (.50,.50,.99) theta (.5,.4,.1) -> 100/0/0 ; theta (.4,.3,.3) -> 72/0/28
        //   eta (.99,.99,.99) -> ~theta*S (prose); eta (.5,.5,.5) -> most popular sweeps (prose)
        let cases: Vec<(Vec<f64>, Vec<f64>, &str)> = vec![
            (vec![0.99, 0.50, 0.50], thetas[0].clone(), "53/47/0"),
            (vec![0.99, 0.50, 0.50], thetas[2].clone(), "45/55/0"),
            (vec![0.50, 0.99, 0.50], thetas[0].clone(), "68/32/0"),
            (vec![0.50, 0.50, 0.99], thetas[0].clone(), "100/0/0"),
            (vec![0.50, 0.50, 0.99], thetas[1].clone(), "72/0/28"),
            (vec![0.99, 0.99, 0.99], thetas[0].clone(), "~50/40/10"),
            (vec![0.50, 0.50, 0.50], thetas[0].clone(), "~100/0/0"),
        ];
        let fracs: Vec<f64> = match args.get(4) {
            Some(s) => s.split(',').map(|x| x.parse().unwrap()).collect(),
            None => vec![0.5, 0.2, 0.1, 0.05, 0.02],
        };
        for frac in fracs.iter().copied() {
            println!("== PCM const-weight u = {frac} * N/S ==");
            for (eta, theta, want) in &cases {
                let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
                let p = PcmParams { eta: eta.clone() };
                let m = mean_seats(
                    |r| simulate_pcm_with_mixing_const(&spec, &p, r, frac).unwrap(),
                    &spec,
                    reps,
                );
                println!("eta {:?} theta {:?} -> {:.1?} (want {want})", eta, theta, m);
            }
        }
        println!("== PCM normalized shares ==");
        for (eta, theta, want) in &cases {
            let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
            let p = PcmParams { eta: eta.clone() };
            let m = mean_seats(
                |r| simulate_pcm_with_mixing_normalized(&spec, &p, r).unwrap(),
                &spec,
                reps,
            );
            println!("eta {:?} theta {:?} -> {:.1?} (want {want})", eta, theta, m);
        }
    }

    if mode == "pcm2" {
        let cases: Vec<(Vec<f64>, Vec<f64>, &str)> = vec![
            (vec![0.99, 0.50, 0.50], thetas[0].clone(), "53/47/0"),
            (vec![0.99, 0.50, 0.50], thetas[2].clone(), "45/55/0"),
            (vec![0.50, 0.99, 0.50], thetas[0].clone(), "68/32/0"),
            (vec![0.50, 0.50, 0.99], thetas[0].clone(), "100/0/0"),
            (vec![0.50, 0.50, 0.99], thetas[1].clone(), "72/0/28"),
            (vec![0.99, 0.99, 0.99], thetas[0].clone(), "~50/40/10"),
            (vec![0.50, 0.50, 0.50], thetas[0].clone(), "~100/0/0"),
        ];
        let fracs: Vec<f64> = match args.get(4) {
            Some(s) => s.split(',').map(|x| x.parse().unwrap()).collect(),
            None => vec![0.01, 0.03, 0.1],
        };
        for frac in fracs.iter().copied() {
            println!("== PCM damped shares, damping = {frac} * N/S ==");
            for (eta, theta, want) in &cases {
                let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
                let p = PcmParams { eta: eta.clone() };
                let m = mean_seats(
                    |r| simulate_pcm_with_mixing_damped(&spec, &p, r, frac).unwrap(),
                    &spec,
                    reps,
                );
                println!("eta {:?} theta {:?} -> {:.1?} (want {want})", eta, theta, m);
            }
        }
        println!("== PCM within-district share ==");
        for (eta, theta, want) in &cases {
            let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
            let p = PcmParams { eta: eta.clone() };
            let m = mean_seats(
                |r| simulate_pcm_with_mixing_within(&spec, &p, r).unwrap(),
                &spec,
                reps,
            );
            println!("eta {:?} theta {:?} -> {:.1?} (want {want})", eta, theta, m);
        }
        let powers: Vec<f64> = match args.get(5) {
            Some(s) => s.split(',').map(|x| x.parse().unwrap()).collect(),
            None => vec![0.7, 0.8, 0.9],
        };
        for p in powers {
            println!("== PCM power shares, p = {p} ==");
            for (eta, theta, want) in &cases {
                let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
                let pp = PcmParams { eta: eta.clone() };
                let m = mean_seats(
                    |r| simulate_pcm_with_mixing_power(&spec, &pp, r, p).unwrap(),
                    &spec,
                    reps,
                );
                println!("eta {:?} theta {:?} -> {:.1?} (want {want})", eta, theta, m);
            }
        }
        for frac in fracs.iter().copied() {
            println!("== PCM smoothed within-share, frac = {frac} ==");
            for (eta, theta, want) in &cases {
                let spec = ElectorateSpec::equal_districts(100, n, theta.clone()).unwrap();
                let pp = PcmParams { eta: eta.clone() };
                let m = mean_seats(
                    |r| simulate_pcm_with_mixing_smoothed(&spec, &pp, r, frac).unwrap(),
                    &spec,
                    reps,
                );
                println!("eta {:?} theta {:?} -> {:.1?} (want {want})", eta, theta, m);
            }
        }
    }
}
