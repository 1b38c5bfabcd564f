use chrono::{Days, NaiveDate};
use proptest::prelude::*;

use resicycle::cycles::{identify_cycles, segment_runs, tau_filter, ResilienceCycle};
use resicycle::dynamics::exceedance;
use resicycle::ingest::{parse_csv, write_csv, CsvOptions};
use resicycle::metrics::{ri, RestabDenominator, ToleranceConfig};
use resicycle::preprocess::{rlowess, PerformanceSeries};

fn csv_text(closes: &[f64], order: &[usize]) -> String {
    let base = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
    let mut text = String::from("Date,Open,Close\n");
    for &i in order {
        let date = base.checked_add_days(Days::new(i as u64)).unwrap();
        text.push_str(&format!("{date},1,{}\n", closes[i]));
    }
    text
}

fn closes(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0e5, 2..max)
}

fn cycle_strategy() -> impl Strategy<Value = ResilienceCycle> {
    (
        0.2f64..1.0,
        0.05f64..0.95,
        0.0f64..1.5,
        1usize..20,
        1usize..20,
    )
        .prop_map(|(p_pre, drop, post, fall, rise)| {
            let p_event = p_pre * (1.0 - drop);
            ResilienceCycle {
                t_pre: 0,
                t_event: fall,
                t_post: fall + rise,
                p_pre,
                p_event,
                p_post: p_event + post * (p_pre - p_event),
            }
        })
}

fn mode() -> impl Strategy<Value = RestabDenominator> {
    prop_oneof![
        Just(RestabDenominator::Eq4),
        Just(RestabDenominator::Appendix)
    ]
}

proptest! {
    #[test]
    fn csv_round_trip(values in closes(60)) {
        let order: Vec<usize> = (0..values.len()).collect();
        let first = parse_csv(csv_text(&values, &order).as_bytes(), "X", CsvOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&first.series, &mut buf).unwrap();
        let second = parse_csv(buf.as_slice(), "X", CsvOptions::default()).unwrap();
        prop_assert_eq!(first.series, second.series);
    }

    #[test]
    fn parsed_dates_are_sorted(values in closes(60), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..values.len()).collect();
        let mut state = seed;
        for i in (1..order.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let parsed = parse_csv(csv_text(&values, &order).as_bytes(), "X", CsvOptions::default()).unwrap();
        let dates: Vec<NaiveDate> = parsed.series.dates().collect();
        prop_assert!(dates.windows(2).all(|w| w[0] < w[1]));
        let got: Vec<f64> = parsed.series.closes().collect();
        prop_assert_eq!(got, values);
    }

    #[test]
    fn rlowess_keeps_shape_and_shifts(
        lop in prop::collection::vec(0.0f64..1.0, 8..80),
        span in 2usize..8,
        shift in -1.0f64..1.0,
    ) {
        let series = PerformanceSeries::from_values("S", lop.clone());
        let smoothed = rlowess(&series, span).unwrap();
        prop_assert_eq!(smoothed.lop.len(), lop.len());
        prop_assert!(smoothed.lop.iter().all(|v| v.is_finite()));
        let moved = PerformanceSeries::from_values("S", lop.iter().map(|v| v + shift).collect());
        let moved = rlowess(&moved, span).unwrap();
        for (a, b) in smoothed.lop.iter().zip(&moved.lop) {
            prop_assert!((a + shift - b).abs() < 1e-6, "{} vs {}", a + shift, b);
        }
    }

    #[test]
    fn filtered_runs_and_cycles_are_well_formed(
        steps in prop::collection::vec(-0.05f64..0.05, 10..120),
        tau in 1usize..8,
    ) {
        let mut lop = vec![0.5];
        for s in steps {
            let last = *lop.last().unwrap();
            lop.push(last + s);
        }
        let series = PerformanceSeries::from_values("S", lop);
        let runs = tau_filter(&segment_runs(&series), &series, tau);
        if runs.len() > 2 {
            prop_assert!(runs[1..runs.len() - 1].iter().all(|r| r.duration() >= tau));
        }
        let cycles = identify_cycles(&series, tau);
        for c in &cycles {
            prop_assert!(c.t_pre < c.t_event && c.t_event <= c.t_post);
            prop_assert!(c.p_event <= c.p_pre);
        }
        for pair in cycles.windows(2) {
            prop_assert!(pair[0].t_post <= pair[1].t_pre);
        }
    }

    #[test]
    fn ri_is_nonnegative(
        cycle in cycle_strategy(),
        p_rr in 0.0f64..0.01,
        p_et in 0.0f64..=1.0,
        restab in mode(),
    ) {
        let cfg = ToleranceConfig { p_rr, p_et, restab_denominator: restab };
        let value = ri(&cycle, &cfg).unwrap();
        prop_assert!(value >= 0.0 && value.is_finite());
    }

    #[test]
    fn ri_non_increasing_in_elasticity(
        cycle in cycle_strategy(),
        a in 0.0f64..=1.0,
        b in 0.0f64..=1.0,
        restab in mode(),
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let at = |p_et| ri(&cycle, &ToleranceConfig { p_et, restab_denominator: restab, ..ToleranceConfig::default() }).unwrap();
        prop_assert!(at(hi) <= at(lo) + 1e-12);
    }

    #[test]
    fn ri_affine_in_rr(cycle in cycle_strategy(), a in 0.0f64..0.01, b in 0.0f64..0.01) {
        let at = |p_rr| ri(&cycle, &ToleranceConfig { p_rr, ..ToleranceConfig::default() }).unwrap();
        let mid = at((a + b) / 2.0);
        prop_assert!((mid - (at(a) + at(b)) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn ri_increasing_in_recovery(cycle in cycle_strategy(), bump in 0.01f64..0.5) {
        let cfg = ToleranceConfig::default();
        let higher = ResilienceCycle { p_post: cycle.p_post + bump, ..cycle };
        let (base, up) = (ri(&cycle, &cfg).unwrap(), ri(&higher, &cfg).unwrap());
        prop_assert!(up > base, "{} !> {}", up, base);
    }

    #[test]
    fn exceedance_is_monotone(values in prop::collection::vec(0.001f64..100.0, 1..200)) {
        let points = exceedance(&values);
        prop_assert_eq!(points[0].1, 1.0);
        for pair in points.windows(2) {
            prop_assert!(pair[0].0 < pair[1].0);
            prop_assert!(pair[0].1 > pair[1].1);
        }
    }
}
