//! Acceptance suite. Runs without the libtest harness and prints one
//! `PASS`/`FAIL` line per criterion; exits nonzero if any criterion fails.

// `ensure!(!cond)` negates float comparisons on purpose: NaN must fail a check
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

mod common;

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request};
use chrono::{DateTime, Utc};
use dyncenter::analysis::analyze;
use dyncenter::engine::{
    evaluate_at, GateId, Instrument, MarketCase, NoveltyClaim, ProductionPlan, TariffTerms,
};
use dyncenter::io_core::{leontief_inverse, load_io_table, TableFormat};
use dyncenter::linkage::{power_of_dispersion, sensitivity_of_dispersion, VThresholdRule};
use dyncenter::matrix::Matrix;
use dyncenter::merger::{delta_hhi, hhi, screen, MarketClass, MergerAction, MergerScenario};
use dyncenter::service::router;
use dyncenter::store::Store;
use dyncenter::structure::{
    concentration_g, entropy, general_index, normalize, normalize_with_final_demand, variation_n_divisor,
    GiOrientation, Orientation, StructureOptions, ZeroLinePolicy,
};
use dyncenter::tech::{
    assess, component_elasticity, tcc, validate_scaling_property, Component, TccReport, TechClass,
    TechnologyProfile,
};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn hhi_anchors() -> Check {
    let h = hhi(&[30.0, 30.0, 20.0, 20.0]).map_err(|e| e.to_string())?;
    ensure!(h == 2600.0, "hhi([30,30,20,20]) = {h}");
    let d = delta_hhi(5.0, 10.0);
    ensure!(d == 100.0, "delta_hhi(5,10) = {d}");
    let m = hhi(&[100.0]).map_err(|e| e.to_string())?;
    ensure!(m == 10000.0, "hhi([100]) = {m}");
    Ok("2600, 100, 10000 exact".into())
}

fn merger_table() -> Check {
    use MarketClass::*;
    use MergerAction::*;
    // (shares, merging pair, post, delta, class, action); boundaries hit exactly
    let cases: &[(&[f64], usize, usize, f64, f64, MarketClass, MergerAction)] = &[
        (&[5.0, 5.0], 0, 1, 100.0, 50.0, Unconcentrated, NoFurtherAnalysis),
        (&[10.0; 10], 0, 1, 1200.0, 200.0, Unconcentrated, NoFurtherAnalysis),
        (&[15.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 5.0], 0, 1, 1250.0, 300.0, Unconcentrated, NoFurtherAnalysis),
        (&[30.0, 1.0, 1.0], 1, 2, 904.0, 2.0, Unconcentrated, NoFurtherAnalysis),
        (&[38.0, 1.0, 1.0], 1, 2, 1448.0, 2.0, Unconcentrated, NoFurtherAnalysis),
        (&[38.0, 5.0, 5.0], 1, 2, 1544.0, 50.0, ModeratelyConcentrated, NoFurtherAnalysis),
        (&[35.0, 5.0, 10.0], 1, 2, 1450.0, 100.0, Unconcentrated, NoFurtherAnalysis),
        (&[38.0, 5.0, 10.0], 1, 2, 1669.0, 100.0, ModeratelyConcentrated, PotentialConcernScrutiny),
        (&[30.0, 10.0, 10.0, 10.0, 10.0], 1, 2, 1500.0, 200.0, ModeratelyConcentrated, PotentialConcernScrutiny),
        (&[25.0, 25.0, 10.0, 10.0, 10.0, 10.0, 10.0], 2, 3, 1950.0, 200.0, ModeratelyConcentrated, PotentialConcernScrutiny),
        (&[40.0, 20.0, 10.0], 1, 2, 2500.0, 400.0, ModeratelyConcentrated, PotentialConcernScrutiny),
        (&[50.0, 5.0, 5.0], 1, 2, 2600.0, 50.0, HighlyConcentrated, NoFurtherAnalysis),
        (&[50.0, 5.0, 10.0], 1, 2, 2725.0, 100.0, HighlyConcentrated, PotentialConcernScrutiny),
        (&[50.0, 10.0, 10.0], 1, 2, 2900.0, 200.0, HighlyConcentrated, PotentialConcernScrutiny),
        (&[50.0, 10.0, 10.1], 1, 2, 2904.01, 202.0, HighlyConcentrated, PresumedEnhancesMarketPower),
        (&[30.0, 30.0, 20.0, 20.0], 2, 3, 3400.0, 800.0, HighlyConcentrated, PresumedEnhancesMarketPower),
    ];
    let mut seen = std::collections::BTreeSet::new();
    for &(shares, a, b, post, delta, class, action) in cases {
        let v = screen(&MergerScenario::new(shares.to_vec(), a, b).map_err(|e| e.to_string())?);
        ensure!((v.delta_hhi - delta).abs() < 1e-9, "{shares:?}: delta {} != {delta}", v.delta_hhi);
        ensure!((v.post_hhi - post).abs() < 1e-6, "{shares:?}: post {} != {post}", v.post_hhi);
        ensure!(
            (v.market_class, v.action) == (class, action),
            "{shares:?}: got {:?}/{:?}, want {class:?}/{action:?}",
            v.market_class,
            v.action
        );
        let band = if delta < 100.0 { 0 } else if delta <= 200.0 { 1 } else { 2 };
        seen.insert((class as u8, band));
    }
    ensure!(seen.len() == 9, "only {} of 9 class x band cells covered", seen.len());
    Ok(format!("{} cases, all 9 class x delta-band cells, boundaries 100/200/1500/2500", cases.len()))
}

fn leontief() -> Check {
    let start = Instant::now();
    let mut r = rng(11);
    let mut worst_residual: f64 = 0.0;
    for trial in 0..200 {
        let n = 3 + trial % 8;
        let a = common::productive_matrix(&mut r, n);
        let b = leontief_inverse(&common::coef(a.clone())).map_err(|e| e.to_string())?;
        let b = b.matrix();
        let i_minus_a = Matrix::identity(n).sub(&a).unwrap();
        let prod = i_minus_a.matmul(b).unwrap();
        let residual = prod.sub(&Matrix::identity(n)).unwrap().max_abs();
        worst_residual = worst_residual.max(residual);
        ensure!(residual < 1e-9, "trial {trial}: residual {residual:e}");

        // partial Neumann sum to K terms; the remainder is bounded by q^(K+1)/(1-q) in the 1-norm
        let q = a.norm_1();
        let mut sum = Matrix::identity(n);
        let mut power = Matrix::identity(n);
        let k_terms = 40;
        for _ in 0..k_terms {
            power = power.matmul(&a).unwrap();
            sum = sum.add(&power).unwrap();
        }
        let gap = b.sub(&sum).unwrap().norm_1();
        let bound = q.powi(k_terms + 1) / (1.0 - q) + 1e-9;
        ensure!(gap <= bound, "trial {trial}: Neumann gap {gap:e} > bound {bound:e}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("200 matrices, worst residual {worst_residual:.1e}, {elapsed:.2?}"))
}

fn rasmussen() -> Check {
    let mut r = rng(12);
    for trial in 0..200 {
        let n = 2 + trial % 9;
        let a = common::productive_matrix(&mut r, n);
        let b = leontief_inverse(&common::coef(a)).map_err(|e| e.to_string())?;
        for (name, u) in [("backward", power_of_dispersion(&b)), ("forward", sensitivity_of_dispersion(&b))] {
            let mean = u.iter().sum::<f64>() / n as f64;
            ensure!((mean - 1.0).abs() < 1e-9, "trial {trial} {name}: mean {mean}");
        }
    }
    let t = load_io_table(common::fixture("oracle2x2.csv"), TableFormat::Csv).map_err(|e| e.to_string())?;
    let a = analyze(&t, VThresholdRule::Median, StructureOptions::default()).map_err(|e| e.to_string())?;
    let u = &a.linkage.u_backward;
    let rounded: Vec<String> = u.iter().map(|v| format!("{v:.6}")).collect();
    ensure!(rounded == ["1.083333", "0.916667"], "2x2 U = {rounded:?}");
    Ok(format!("mean 1 on 200 tables, 2x2 U = [{}]", rounded.join(", ")))
}

fn shares_of(rows: &[Vec<f64>]) -> dyncenter::structure::NormalizedShares {
    normalize(&Matrix::from_rows(rows).unwrap(), Orientation::Row, ZeroLinePolicy::Exclude).unwrap()
}

fn random_line<R: Rng>(r: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| if r.gen_bool(0.2) { 0.0 } else { r.gen_range(0.0..100.0) })
        .collect::<Vec<_>>()
}

fn g_anchors() -> Check {
    for n in 2..=12 {
        let mut one_hot = vec![0.0; n];
        one_hot[n / 2] = 3.5;
        let uniform = vec![7.0; n];
        let g = concentration_g(&shares_of(&[one_hot, uniform]));
        let (g0, gu) = (g[0].unwrap(), g[1].unwrap());
        ensure!(g0.abs() <= 1e-12, "n={n}: one-hot G {g0:e}");
        let want = ((n - 1) as f64).sqrt();
        ensure!((gu - want).abs() <= 1e-12, "n={n}: uniform G {gu} vs {want}");
    }
    let mut r = rng(13);
    let mut checked = 0;
    for _ in 0..1000 {
        let n = r.gen_range(2..15);
        let line = random_line(&mut r, n);
        if line.iter().all(|v| *v == 0.0) {
            continue;
        }
        let g = concentration_g(&shares_of(std::slice::from_ref(&line)))[0].unwrap();
        let v = variation_n_divisor(&line);
        let lhs = g * g + v * v;
        ensure!((lhs - (n - 1) as f64).abs() < 1e-9, "G^2+V^2 = {lhs} on n={n}");
        checked += 1;
    }
    Ok(format!("anchors n=2..12, identity on {checked} random lines"))
}

fn entropy_anchors() -> Check {
    for n in 2..=12 {
        let mut one_hot = vec![0.0; n];
        one_hot[0] = 1.0;
        let h = entropy(&shares_of(&[one_hot, vec![1.0; n]]));
        ensure!(h[0].unwrap().abs() <= 1e-12, "n={n}: one-hot H {}", h[0].unwrap());
        let ln_n = (n as f64).ln();
        ensure!((h[1].unwrap() - ln_n).abs() <= 1e-12, "n={n}: uniform H {} vs {ln_n}", h[1].unwrap());
    }
    let mut r = rng(14);
    let mut lines = 0;
    while lines < 1000 {
        let n = r.gen_range(2..20);
        let line = random_line(&mut r, n);
        if line.iter().all(|v| *v == 0.0) {
            continue;
        }
        let h = entropy(&shares_of(&[line]))[0].unwrap();
        ensure!(h >= 0.0 && h <= (n as f64).ln() + 1e-12, "H {h} outside [0, ln {n}]");
        lines += 1;
    }
    for trial in 0..100 {
        let n = 2 + trial % 9;
        let a = common::productive_matrix(&mut r, n);
        let t = common::table_from(&mut r, &a);
        let s = normalize_with_final_demand(&t, ZeroLinePolicy::Exclude).unwrap();
        let bound = ((n + 1) as f64).ln() + 1e-12;
        for h in entropy(&s).into_iter().flatten() {
            ensure!((0.0..=bound).contains(&h), "final-demand H {h} > ln({})", n + 1);
        }
    }
    Ok("anchors n=2..12, 1000 random lines, 100 final-demand tables".into())
}

fn tcc_properties() -> Check {
    let start = Instant::now();
    let mut r = rng(15);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let mut p = common::random_profile(&mut r);
        for c in Component::ALL {
            // leave room for the (1 + k) scaling step
            p = p.with_score(c, p.score(c).min(8.99));
        }
        let t = tcc(&p).map_err(|e| e.to_string())?;
        ensure!((0.0..9.0).contains(&t), "trial {trial}: TCC {t}");
        let a = assess(&p).map_err(|e| e.to_string())?;
        ensure!(a.tca <= p.eva, "trial {trial}: TCA {} > EVA {}", a.tca, p.eva);
        for c in Component::ALL {
            let x = p.score(c);
            let h = 1e-4 * x;
            let up = tcc(&p.with_score(c, (x + h).min(9.0))).unwrap();
            let down = tcc(&p.with_score(c, (x - h).max(1.0))).unwrap();
            let width = (x + h).min(9.0) - (x - h).max(1.0);
            let numeric = (up - down) / width;
            let analytic = p.betas[c as usize] * t / x;
            let rel = (numeric - analytic).abs() / analytic.abs().max(1e-300);
            worst = worst.max(rel);
            ensure!(rel <= 1e-6, "trial {trial} {}: analytic {analytic} fd {numeric}", c.symbol());
            let reported = component_elasticity(&p, c).unwrap();
            ensure!((reported - analytic).abs() <= 1e-12 * analytic.abs().max(1.0), "elasticity mismatch");
        }
        let s = validate_scaling_property(&p, 1e-4).map_err(|e| e.to_string())?;
        ensure!(
            (s.relative_change - s.predicted).abs() <= 1e-7,
            "trial {trial}: scaling {} vs {}",
            s.relative_change,
            s.predicted
        );
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(2), "took {elapsed:?}");
    Ok(format!("100 profiles, worst fd rel err {worst:.1e}, {elapsed:.2?}"))
}

fn gi_properties() -> Check {
    let mut r = rng(16);
    for trial in 0..300 {
        let n = r.gen_range(2..12);
        let u: Vec<f64> = (0..n).map(|_| r.gen_range(0.2..2.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..3.0)).collect();
        let alpha: f64 = r.gen_range(0.0..=1.0);

        let same = general_index(&u, &u.iter().map(|v| v * 3.0 + 1.0).collect::<Vec<_>>(), alpha).unwrap();
        ensure!(same.ranks_g == same.ranks_u, "trial {trial}: ranks differ");
        let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(a, b)| (a - b).abs() <= 1e-12);
        ensure!(close(&same.gi, &same.ranks_u), "trial {trial}: RG = RU but GI != RU");

        let at0 = general_index(&u, &g, 0.0).unwrap();
        let at1 = general_index(&u, &g, 1.0).unwrap();
        ensure!(at0.gi == at0.ranks_u, "trial {trial}: alpha 0 is not RU");
        ensure!(at1.gi == at1.ranks_g, "trial {trial}: alpha 1 is not RG");

        let base = general_index(&u, &g, alpha).unwrap();
        let u2: Vec<f64> = u.iter().map(|v| v.powi(3) + 5.0).collect();
        let g2: Vec<f64> = g.iter().map(|v| (v + 1.0).ln() * 10.0).collect();
        let moved = general_index(&u2, &g2, alpha).unwrap();
        ensure!(moved.gi == base.gi, "trial {trial}: GI changed under monotone rescaling");
    }
    Ok("300 random cases: RG=RU, endpoints, monotone invariance".into())
}

fn at() -> DateTime<Utc> {
    DateTime::<Utc>::UNIX_EPOCH
}

fn engine_cases() -> Vec<(String, ProductionPlan, Vec<Instrument>)> {
    use Instrument::*;
    let support_credit = vec![CreditCreationWithProductiveMeansCollateral];
    let reject = vec![Reject];
    let mut cases = Vec::new();

    for (f, d) in [(true, true), (true, false), (false, true), (false, false)] {
        let p = ProductionPlan {
            feasibility_confirmed: f,
            demand_probable_at_mass_production: d,
            ..ProductionPlan::new("g1", NoveltyClaim::NewGood)
        };
        let want = if f && d { support_credit.clone() } else { reject.clone() };
        cases.push((format!("g1 feasible={f} demand={d}"), p, want));
    }

    for class in [TechClass::Base, TechClass::Key, TechClass::Pacing, TechClass::Emerging] {
        for foreign in [false, true] {
            for price in [false, true] {
                let p = ProductionPlan {
                    technology_profile: Some(common::derived_profile()),
                    tech_class: Some(class),
                    foreign_investment: foreign,
                    price_reduction_expected: price,
                    ..ProductionPlan::new("g2", NoveltyClaim::NewMethod)
                };
                // pacing and emerging are supported in any case
                let supported = class.is_advanced() || (price && !foreign);
                let want = if supported { support_credit.clone() } else { reject.clone() };
                cases.push((format!("g2 {class} foreign={foreign} price={price}"), p, want));
            }
        }
    }

    let terms = TariffTerms {
        contract_reference: "K-7".into(),
        duration_months: 24,
    };
    for (case, want) in [
        (
            MarketCase::GovernmentProcurement,
            vec![CreditAtMinimumInterest, TariffByContractTimeLimited, GovernmentProcurementContract],
        ),
        (MarketCase::DomesticGrowthPrediction, vec![TariffByContractTimeLimited]),
        (
            MarketCase::GlobalGrowthPrediction,
            vec![ExportSubsidyOrGuaranteeFund, BilateralTradeAgreementFacilitation],
        ),
    ] {
        let p = ProductionPlan {
            market_case: Some(case),
            tariff_terms: Some(terms.clone()),
            ..ProductionPlan::new("g3", NoveltyClaim::NewMarket)
        };
        cases.push((format!("g3 {case:?}"), p, want));
    }

    let markets: [(&str, &[f64], usize, usize, bool); 3] = [
        ("unconcentrated", &[10.0; 10], 0, 1, true),
        ("moderate", &[25.0, 25.0, 10.0, 10.0, 10.0, 10.0, 10.0], 2, 3, true),
        ("high", &[30.0, 30.0, 20.0, 20.0], 2, 3, false),
    ];
    for (name, shares, a, b, acceptable) in markets {
        for verified in [true, false] {
            let p = ProductionPlan {
                merger: Some(MergerScenario::new(shares.to_vec(), a, b).unwrap()),
                claimed_objectives_verified: verified,
                ..ProductionPlan::new("g4", NoveltyClaim::NewOrganization)
            };
            let want = if acceptable && verified { vec![DirectSubsidy, TaxRelief] } else { reject.clone() };
            cases.push((format!("g4 {name} verified={verified}"), p, want));
        }
    }

    // modernization guardrail applied to one supported plan per group
    let supported: Vec<_> = cases
        .iter()
        .filter(|(_, _, want)| !want.contains(&Reject))
        .map(|(name, p, want)| (name.clone(), p.clone(), want.clone()))
        .collect();
    for group in ["g1", "g2", "g3", "g4"] {
        let (name, p, want) = supported.iter().find(|(n, _, _)| n.starts_with(group)).unwrap().clone();
        for (established, modernizing) in [(true, false), (true, true)] {
            let q = ProductionPlan {
                is_established_industry: established,
                involves_modernization_or_restructuring: modernizing,
                ..p.clone()
            };
            let expect = if modernizing { want.clone() } else { reject.clone() };
            cases.push((format!("{name} established modernizing={modernizing}"), q, expect));
        }
    }
    cases
}

fn random_json<R: Rng>(r: &mut R, depth: u32) -> serde_json::Value {
    use serde_json::Value;
    match if depth == 0 { r.gen_range(0..4) } else { r.gen_range(0..6) } {
        0 => Value::Null,
        1 => Value::from(r.gen::<bool>()),
        2 => Value::from(r.gen::<i64>()),
        3 => Value::from((0..r.gen_range(0..12)).map(|_| r.gen_range('a'..='z')).collect::<String>()),
        4 => Value::from((0..r.gen_range(0..4)).map(|_| random_json(r, depth - 1)).collect::<Vec<_>>()),
        _ => Value::Object(
            (0..r.gen_range(0..4))
                .map(|k| (format!("k{k}"), random_json(r, depth - 1)))
                .collect(),
        ),
    }
}

fn engine_rules() -> Check {
    let cases = engine_cases();
    ensure!(cases.len() <= 50, "{} cases exceeds the suite budget", cases.len());
    for (name, p, want) in &cases {
        let e = evaluate_at(p, at()).map_err(|e| format!("{name}: {e}"))?;
        e.check_invariants().map_err(|m| format!("{name}: {m}"))?;
        ensure!(&e.instrument_set() == want, "{name}: got {:?}, want {want:?}", e.instrument_set());
        if want == &[Instrument::Reject] && p.is_established_industry && !p.involves_modernization_or_restructuring {
            ensure!(
                e.instruments[0].justified_by == [GateId::EstablishedIndustryRenewal],
                "{name}: guardrail not cited"
            );
        }
    }
    let foreign_key = &cases.iter().find(|(n, _, _)| n == "g2 key foreign=true price=true").ok_or("missing case")?.1;
    let e = evaluate_at(foreign_key, at()).unwrap();
    ensure!(
        e.instruments[0].justified_by == [GateId::ForeignInvestmentTechnology],
        "foreign-investment gate not cited"
    );

    let mut r = rng(17);
    let mut fuzzed = 0;
    for (name, p, _) in &cases {
        let reference = serde_json::to_vec(&evaluate_at(p, at()).unwrap()).unwrap();
        for _ in 0..20 {
            let q = ProductionPlan {
                applicant_metadata: random_json(&mut r, 3),
                ..p.clone()
            };
            let got = serde_json::to_vec(&evaluate_at(&q, at()).unwrap()).unwrap();
            ensure!(got == reference, "{name}: metadata changed the evaluation");
            fuzzed += 1;
        }
    }
    Ok(format!("{} rule cases, {fuzzed} metadata-fuzzed evaluations identical", cases.len()))
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dyncenter"))
        .args(args)
        .env_remove("DC_STORE_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "dyncenter {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn pretty_line<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).unwrap();
    out.push(b'\n');
    out
}

async fn http(app: &axum::Router, method: &str, uri: &str, ct: &str, body: Vec<u8>) -> Result<Vec<u8>, String> {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, ct)
        .body(Body::from(body))
        .unwrap();
    let resp = app.clone().oneshot(req).await.map_err(|e| e.to_string())?;
    let status = resp.status();
    let bytes = resp.into_body().collect().await.map_err(|e| e.to_string())?.to_bytes().to_vec();
    ensure!(status.is_success(), "{method} {uri}: {status} {}", String::from_utf8_lossy(&bytes));
    Ok(bytes)
}

fn end_to_end() -> Check {
    let mut compared = 0;
    for name in ["oracle2x2.csv", "key3x3.csv"] {
        let path = common::fixture(name);
        let t = load_io_table(&path, TableFormat::Csv).map_err(|e| e.to_string())?;
        let lib = analyze(&t, VThresholdRule::Median, StructureOptions::default()).map_err(|e| e.to_string())?;
        let mut expected = Vec::new();
        lib.linkage.write_csv(&mut expected).unwrap();
        expected.push(b'\n');
        lib.structure.write_csv(&mut expected, GiOrientation::Backward).unwrap();
        ensure!(cli(&["io", "analyze", path.to_str().unwrap()])? == expected, "{name}: CLI csv differs");
        compared += 1;
    }

    let profile_path = common::fixture("derived_profile.json");
    let profile: TechnologyProfile = common::derived_profile();
    let lib_tcc = TccReport {
        assessment: assess(&profile).unwrap(),
        scaling: Some(validate_scaling_property(&profile, 1e-4).unwrap()),
    };
    let got = cli(&["tcc", "--profile", profile_path.to_str().unwrap(), "--k", "0.0001", "--json"])?;
    ensure!(got == pretty_line(&lib_tcc), "CLI tcc json differs");
    let lib_merger = screen(&MergerScenario::new(vec![30.0, 30.0, 20.0, 20.0], 2, 3).unwrap());
    ensure!(
        cli(&["hhi", "--shares", "30,30,20,20", "--merge", "2,3", "--json"])? == pretty_line(&lib_merger),
        "CLI hhi json differs"
    );
    compared += 2;

    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    let http_compared = rt.block_on(async {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let app = router(Arc::new(Store::open(dir.path()).map_err(|e| e.to_string())?));
        let mut n = 0;
        for name in ["oracle2x2.csv", "key3x3.csv"] {
            let path = common::fixture(name);
            let created = http(&app, "POST", "/tables", "text/csv", std::fs::read(&path).unwrap()).await?;
            let id = serde_json::from_slice::<serde_json::Value>(&created).unwrap()["id"].as_str().unwrap().to_string();
            let t = load_io_table(&path, TableFormat::Csv).unwrap();
            let lib = analyze(&t, VThresholdRule::Median, StructureOptions::default()).unwrap();
            let got = http(&app, "GET", &format!("/analysis/io/{id}/linkages"), "application/json", vec![]).await?;
            ensure!(got == serde_json::to_vec(&lib.linkage).unwrap(), "{name}: HTTP linkages differ");
            let got = http(&app, "GET", &format!("/analysis/io/{id}/structure"), "application/json", vec![]).await?;
            ensure!(got == serde_json::to_vec(&lib.structure).unwrap(), "{name}: HTTP structure differs");
            n += 2;
        }
        let got = http(
            &app,
            "POST",
            "/tools/tcc?k=0.0001",
            "application/json",
            std::fs::read(&profile_path).unwrap(),
        )
        .await?;
        ensure!(got == serde_json::to_vec(&lib_tcc).unwrap(), "HTTP tcc differs");
        let body = br#"{"shares":[30,30,20,20],"merging":[2,3]}"#.to_vec();
        let got = http(&app, "POST", "/tools/hhi", "application/json", body).await?;
        ensure!(got == serde_json::to_vec(&lib_merger).unwrap(), "HTTP hhi differs");
        Ok::<_, String>(n + 2)
    })?;
    Ok(format!("{} CLI and {http_compared} HTTP responses byte-identical", compared))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("hhi anchors", hhi_anchors),
        ("merger rule table", merger_table),
        ("leontief correctness", leontief),
        ("rasmussen normalization", rasmussen),
        ("G anchors", g_anchors),
        ("entropy anchors", entropy_anchors),
        ("TCC properties", tcc_properties),
        ("GI properties", gi_properties),
        ("decision engine rule tables", engine_rules),
        ("end-to-end CLI and HTTP", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {:>2} {name}: panicked", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
