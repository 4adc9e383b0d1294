//! Exact-expectation checks for the simulator's testing-selection model.
//!
//! For tiny worlds the full outcome distribution of the sampling recipe can
//! be enumerated exhaustively: every infection subset each day, every
//! weighted selection branch. The enumerated expectations prove that triage
//! weight >= 1 makes the tested sub-population at least as infected as the
//! untested one (with exact equality at weight 1), and a Monte Carlo run of
//! the production sampler must agree with the enumeration.

use epibounds::sim::{simulate, SimParams};

#[derive(Clone, Copy)]
struct TinyWorld {
    population: u32,
    horizon: u32,
    hazard: f64,
    budget_per_day: u32,
    triage: f64,
}

#[derive(Default, Clone, Copy)]
struct Expectations {
    tested_infected: f64,
    untested_infected: f64,
    tested: f64,
}

/// Walk the full probability tree of the sampling recipe: per-day
/// independent infection draws for the not-yet-infected, then weighted
/// selections without replacement. Test results are irrelevant to the
/// counts and are not branched on.
fn enumerate(world: TinyWorld) -> Expectations {
    fn day_step(
        world: TinyWorld,
        day: u32,
        infected: u32,
        tested: u32,
        prob: f64,
        acc: &mut Expectations,
    ) {
        let n = world.population;
        if day == world.horizon {
            let tested_infected = (infected & tested).count_ones() as f64;
            let untested_infected = (infected & !tested).count_ones() as f64;
            acc.tested_infected += prob * tested_infected;
            acc.untested_infected += prob * untested_infected;
            acc.tested += prob * tested.count_ones() as f64;
            return;
        }
        // Enumerate infection subsets of the currently uninfected.
        let uninfected: Vec<u32> = (0..n).filter(|p| infected & (1 << p) == 0).collect();
        let k = uninfected.len() as u32;
        for subset in 0..(1u32 << k) {
            let bits = subset.count_ones();
            let p_subset = world.hazard.powi(bits as i32)
                * (1.0 - world.hazard).powi((k - bits) as i32);
            let mut new_infected = infected;
            for (j, &p) in uninfected.iter().enumerate() {
                if subset & (1 << j) != 0 {
                    new_infected |= 1 << p;
                }
            }
            select_step(
                world,
                day,
                new_infected,
                tested,
                world.budget_per_day,
                prob * p_subset,
                acc,
            );
        }
    }

    fn select_step(
        world: TinyWorld,
        day: u32,
        infected: u32,
        tested: u32,
        remaining_budget: u32,
        prob: f64,
        acc: &mut Expectations,
    ) {
        let eligible: Vec<u32> = (0..world.population)
            .filter(|p| tested & (1 << p) == 0)
            .collect();
        if remaining_budget == 0 || eligible.is_empty() {
            day_step(world, day + 1, infected, tested, prob, acc);
            return;
        }
        let weight =
            |p: u32| if infected & (1 << p) != 0 { world.triage } else { 1.0 };
        let total: f64 = eligible.iter().map(|&p| weight(p)).sum();
        for &p in &eligible {
            select_step(
                world,
                day,
                infected,
                tested | (1 << p),
                remaining_budget - 1,
                prob * weight(p) / total,
                acc,
            );
        }
    }

    let mut acc = Expectations::default();
    day_step(world, 0, 0, 0, 1.0, &mut acc);
    acc
}

fn tiny(triage: f64) -> TinyWorld {
    TinyWorld {
        population: 4,
        horizon: 2,
        hazard: 0.3,
        budget_per_day: 1,
        triage,
    }
}

fn enumerated_rates(world: TinyWorld) -> (f64, f64) {
    let e = enumerate(world);
    let untested = world.population as f64 - e.tested;
    (e.tested_infected / e.tested, e.untested_infected / untested)
}

#[test]
fn random_selection_equalizes_infection_rates_exactly() {
    let (tested, untested) = enumerated_rates(tiny(1.0));
    assert!(
        (tested - untested).abs() < 1e-12,
        "triage 1: {tested} vs {untested}"
    );
}

#[test]
fn triage_makes_tested_rate_dominate() {
    for triage in [2.0, 10.0] {
        let (tested, untested) = enumerated_rates(tiny(triage));
        assert!(
            tested > untested + 1e-6,
            "triage {triage}: {tested} vs {untested}"
        );
    }
    // Stronger triage, larger gap.
    let (t2, u2) = enumerated_rates(tiny(2.0));
    let (t10, u10) = enumerated_rates(tiny(10.0));
    assert!(t10 - u10 > t2 - u2);
}

#[test]
fn production_sampler_matches_enumerated_expectations() {
    for triage in [1.0, 2.0, 10.0] {
        let world = tiny(triage);
        let exact = enumerate(world);
        let mut tested_infected_sum = 0.0;
        let mut untested_infected_sum = 0.0;
        const SEEDS: u64 = 20_000;
        for seed in 0..SEEDS {
            let params = SimParams {
                population: world.population,
                horizon: world.horizon,
                daily_infection_hazard: vec![world.hazard],
                test_budget: vec![world.budget_per_day],
                triage_strength: triage,
                miss_rate_true: 0.2,
                severe_hazards: None,
                seed,
            };
            let sim = simulate(&params).unwrap();
            let last = sim.days.last().unwrap();
            tested_infected_sum += last.tested_infected as f64;
            untested_infected_sum += (last.infected - last.tested_infected) as f64;
        }
        let mc_tested = tested_infected_sum / SEEDS as f64;
        let mc_untested = untested_infected_sum / SEEDS as f64;
        assert!(
            (mc_tested - exact.tested_infected).abs() < 0.02,
            "triage {triage}: tested∧infected {mc_tested} vs exact {}",
            exact.tested_infected
        );
        assert!(
            (mc_untested - exact.untested_infected).abs() < 0.02,
            "triage {triage}: untested∧infected {mc_untested} vs exact {}",
            exact.untested_infected
        );
    }
}

#[test]
fn enumeration_scales_to_slightly_larger_worlds() {
    // A 5-person, 2-day world with budget 2/day still enumerates quickly
    // and shows the same ordering.
    let world = TinyWorld {
        population: 5,
        horizon: 2,
        hazard: 0.2,
        budget_per_day: 2,
        triage: 3.0,
    };
    let (tested, untested) = enumerated_rates(world);
    assert!(tested > untested);
}
