//! Property checks shared by the property tests and the acceptance run.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use radlib::chain::{assemble_subset, walk, ChainError, ChainOptions, MemorySource};
use radlib::export::{parse_csv, render_table, ExportFormat};
use radlib::identify::{qualify_peaks, Peak, PeakList};
use radlib::levels::cascade_visit;
use radlib::library::{prune, EntryFlag, LibraryEntry, PruneBounds, RadionuclideLibrary};
use radlib::model::{
    element_symbol, format_nuclide_id, parse_nuclide_id, DecayMode, EnergyValue, HalfLife, LevelSpec, Nuclide,
    RadiationType, TimeUnit, Tolerance,
};
use radlib::normalize::{extract_daughters, DecayRecord, Intensity, LevelRecord, LevelScheme, TransitionRecord};

pub type Check = fn(u32) -> Result<(), String>;

/// Every suite by name.
pub const SUITES: [(&str, Check); 14] = [
    ("nuclide id parse/format round trip", nuclide_round_trip),
    ("half-life unit round trip", half_life_round_trip),
    ("subset set identity", subset_identity),
    ("prune idempotence", prune_idempotent),
    ("prune monotonicity", prune_monotone),
    ("prune axis commutativity", prune_commutes),
    ("cascade monotonicity", cascade_monotone),
    ("cascade idempotence", cascade_idempotent),
    ("csv export/import identity", csv_identity),
    ("walk termination on random graphs", walk_terminates),
    ("kind order independence", kind_order_independent),
    ("daughter extraction order independence", daughters_order_independent),
    ("parser totality on arbitrary input", parsers_total),
    ("qualify monotonicity and peak order", qualify_properties),
];

fn run<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut r = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    r.run(&s, f).map_err(|e| e.to_string())
}

// ---- strategies ----

pub fn any_nuclide() -> impl Strategy<Value = Nuclide> {
    let level = prop_oneof![
        Just(LevelSpec::Ground),
        (1u8..=9).prop_map(LevelSpec::Metastable),
        (1u32..50_000_000).prop_map(|x| LevelSpec::Energy(x as f64 / 10_000.0)),
    ];
    (1u8..=118, 1u16..=300, level).prop_filter_map("known element", |(z, a, l)| {
        element_symbol(z)?;
        Nuclide::new(z, a, l).ok()
    })
}

fn node(i: usize) -> Nuclide {
    Nuclide::ground(1 + i as u8, 2 * (i as u16 + 1)).unwrap()
}

pub fn synthetic_record(parent: Nuclide, daughter: Nuclide, mode: DecayMode, br: f64) -> DecayRecord {
    let radiation = match mode {
        DecayMode::Alpha => RadiationType::Alpha,
        _ => RadiationType::BetaMinus,
    };
    DecayRecord {
        parent,
        parent_level: EnergyValue::GROUND,
        parent_level_offset: None,
        parent_half_life: None,
        radiation,
        energy: EnergyValue::exact(100.0),
        energy_uncertainty_reported: false,
        intensity: Some(Intensity { percent: br, uncertainty: 0.0, uncertainty_reported: false }),
        start_level: None,
        end_level: None,
        label: None,
        daughter,
        daughter_feeding_level: Some(EnergyValue::GROUND),
        decay_mode: mode,
        branching_percent: Some(br),
        row: 0,
    }
}

/// Random directed graph over `n` nodes; cycles and convergent branches allowed.
#[derive(Debug, Clone)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize, bool, f64)>,
}

impl Graph {
    pub fn source(&self) -> MemorySource {
        let mut s = MemorySource::default();
        for &(p, d, alpha, br) in &self.edges {
            let mode = if alpha { DecayMode::Alpha } else { DecayMode::BetaMinus };
            s.add_record(synthetic_record(node(p), node(d), mode, br));
        }
        s
    }

    fn decays(&self, i: usize) -> bool {
        self.edges.iter().any(|e| e.0 == i && e.1 != i)
    }

    /// Breadth-first reachable set from `i`.
    pub fn reachable(&self, i: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([i]);
        let mut q = VecDeque::from([i]);
        while let Some(x) = q.pop_front() {
            for e in self.edges.iter().filter(|e| e.0 == x) {
                if seen.insert(e.1) {
                    q.push_back(e.1);
                }
            }
        }
        seen
    }
}

pub fn any_graph(max_nodes: usize) -> impl Strategy<Value = Graph> {
    (2..=max_nodes).prop_flat_map(|n| {
        let edge = (0..n, 0..n, any::<bool>(), 1u32..=1000).prop_map(|(p, d, a, b)| (p, d, a, b as f64 / 10.0));
        proptest::collection::vec(edge, 0..n * 3).prop_map(move |mut edges| {
            edges.retain(|e| e.0 != e.1);
            let mut seen = HashSet::new();
            edges.retain(|e| seen.insert((e.0, e.1)));
            Graph { n, edges }
        })
    })
}

fn entry_strategy(radiation: RadiationType) -> impl Strategy<Value = LibraryEntry> {
    let hl =
        prop_oneof![Just(None), Just(Some(HalfLife::Stable)), (1e-9f64..1e18).prop_map(|s| HalfLife::seconds(s, 0.0)),];
    let flags = proptest::collection::btree_set(
        prop_oneof![Just(EntryFlag::Unvalidated), Just(EntryFlag::NoUncertainty), Just(EntryFlag::NoIntensity)],
        0..3,
    );
    (
        any_nuclide(),
        0.0f64..12_000.0,
        0.0f64..5.0,
        proptest::option::weighted(0.9, 0.0f64..=100.0),
        0.0f64..2.0,
        hl,
        0.0f64..3000.0,
        flags,
    )
        .prop_map(move |(nuclide, e, ue, i, ui, half_life, pl, flags)| LibraryEntry {
            nuclide,
            radiation,
            energy: EnergyValue::new(e, ue),
            intensity_percent: i,
            intensity_uncertainty: ui,
            half_life,
            parent_level_kev: pl,
            flags,
        })
}

pub fn any_library() -> impl Strategy<Value = RadionuclideLibrary> {
    prop_oneof![Just(RadiationType::Alpha), Just(RadiationType::Gamma), Just(RadiationType::Electron)].prop_flat_map(
        |r| proptest::collection::vec(entry_strategy(r), 0..40).prop_map(move |e| RadionuclideLibrary::new(r, e)),
    )
}

fn interval(lo: f64, hi: f64) -> impl Strategy<Value = (f64, f64)> {
    (lo..hi, lo..hi).prop_map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
}

pub fn any_bounds() -> impl Strategy<Value = PruneBounds> {
    (interval(0.0, 12_000.0), interval(0.0, 100.0), proptest::option::of(interval(0.0, 1e12))).prop_map(
        |(energy_kev, intensity_percent, half_life_s)| PruneBounds { energy_kev, intensity_percent, half_life_s },
    )
}

/// Level scheme with well separated levels and random downward transitions.
pub fn any_scheme() -> impl Strategy<Value = LevelScheme> {
    (2usize..25).prop_flat_map(|n| {
        let t = (0..n, 0..n).prop_filter_map("downward", |(a, b)| (a != b).then(|| (a.max(b), a.min(b))));
        proptest::collection::vec(t, 0..n * 2).prop_map(move |pairs| {
            let nuc = node(0);
            let levels: Vec<LevelRecord> = (0..n)
                .map(|i| LevelRecord {
                    nuclide: nuc,
                    energy: EnergyValue::exact(i as f64 * 50.0),
                    offset: None,
                    jpi: None,
                    half_life: None,
                    isomer: None,
                    decay_modes: Vec::new(),
                })
                .collect();
            let transitions = pairs
                .into_iter()
                .map(|(s, e)| TransitionRecord {
                    nuclide: nuc,
                    start_level: levels[s].energy,
                    end_level: levels[e].energy,
                    gamma_energy: EnergyValue::exact((s - e) as f64 * 50.0),
                    intensity: None,
                    start_index: s,
                    end_index: e,
                })
                .collect();
            LevelScheme { nuclide: nuc, levels, transitions, tolerance: Tolerance::default() }
        })
    })
}

fn is_subsequence(small: &[LibraryEntry], big: &[LibraryEntry]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

fn contains(outer: (f64, f64), inner: (f64, f64)) -> bool {
    outer.0 <= inner.0 && inner.1 <= outer.1
}

// ---- checks ----

pub fn nuclide_round_trip(cases: u32) -> Result<(), String> {
    run(cases, any_nuclide(), |n| {
        let s = format_nuclide_id(&n);
        prop_assert_eq!(parse_nuclide_id(&s), Ok(n));
        prop_assert_eq!(format_nuclide_id(&parse_nuclide_id(&s).unwrap()), s);
        let e = n.erased();
        let dashed = format!("{}-{}", e.element(), e.mass_number());
        prop_assert_eq!(parse_nuclide_id(&dashed), Ok(e));
        Ok(())
    })
}

pub fn half_life_round_trip(cases: u32) -> Result<(), String> {
    run(cases, 1e-12f64..1e12, |years| {
        let h = HalfLife::from_unit(years, 0.0, TimeUnit::Year).unwrap();
        let back = h.in_unit(TimeUnit::Year).unwrap();
        prop_assert!(((back - years) / years).abs() < 1e-12, "{} -> {}", years, back);
        Ok(())
    })
}

/// X = (R ∪ Y ∪ S) \ E against an independent reachability oracle.
pub fn subset_identity(cases: u32) -> Result<(), String> {
    let s = any_graph(12).prop_flat_map(|g| {
        let n = g.n;
        let pick = proptest::collection::btree_set(0..n, 0..4);
        (Just(g), pick.clone(), pick.clone(), pick)
    });
    run(cases, s, |(g, r, st, ex)| {
        let src = g.source();
        let to = |v: &BTreeSet<usize>| v.iter().map(|&i| node(i)).collect::<Vec<_>>();
        let mut expected: BTreeSet<usize> = BTreeSet::new();
        for &p in &r {
            expected.insert(p);
            expected.extend(g.reachable(p).into_iter().filter(|&x| g.decays(x)));
        }
        expected.extend(st.iter().copied());
        expected.retain(|x| !ex.contains(x));
        let got = assemble_subset(&to(&r), &to(&st), &to(&ex), &src, &ChainOptions::default());
        if expected.is_empty() {
            prop_assert!(matches!(got, Err(ChainError::EmptySubset)));
        } else {
            let got: BTreeSet<Nuclide> =
                got.map_err(|e| TestCaseError::fail(e.to_string()))?.members.into_iter().collect();
            prop_assert_eq!(got, expected.iter().map(|&i| node(i)).collect::<BTreeSet<_>>());
        }
        Ok(())
    })
}

pub fn prune_idempotent(cases: u32) -> Result<(), String> {
    run(cases, (any_library(), any_bounds()), |(lib, b)| {
        let once = prune(&lib, &b).unwrap();
        let twice = prune(&once, &b).unwrap();
        prop_assert_eq!(once.entries, twice.entries);
        Ok(())
    })
}

pub fn prune_monotone(cases: u32) -> Result<(), String> {
    run(cases, (any_library(), any_bounds(), any_bounds()), |(lib, a, b)| {
        // Widen `b` so that it contains `a`.
        let hull = |x: (f64, f64), y: (f64, f64)| (x.0.min(y.0), x.1.max(y.1));
        let wide = PruneBounds {
            energy_kev: hull(a.energy_kev, b.energy_kev),
            intensity_percent: hull(a.intensity_percent, b.intensity_percent),
            half_life_s: match (a.half_life_s, b.half_life_s) {
                (Some(x), Some(y)) => Some(hull(x, y)),
                _ => None,
            },
        };
        prop_assert!(contains(wide.energy_kev, a.energy_kev));
        let narrow = prune(&lib, &a).unwrap();
        let broad = prune(&lib, &wide).unwrap();
        prop_assert!(is_subsequence(&narrow.entries, &broad.entries));
        prop_assert!(is_subsequence(&broad.entries, &lib.entries));
        Ok(())
    })
}

pub fn prune_commutes(cases: u32) -> Result<(), String> {
    run(cases, (any_library(), any_bounds()), |(lib, b)| {
        let e = PruneBounds { energy_kev: b.energy_kev, ..Default::default() };
        let i = PruneBounds { intensity_percent: b.intensity_percent, ..Default::default() };
        let h = PruneBounds { half_life_s: b.half_life_s, ..Default::default() };
        let all = prune(&lib, &b).unwrap().entries;
        let ehi = prune(&prune(&prune(&lib, &e).unwrap(), &h).unwrap(), &i).unwrap().entries;
        let ieh = prune(&prune(&prune(&lib, &i).unwrap(), &e).unwrap(), &h).unwrap().entries;
        let hie = prune(&prune(&prune(&lib, &h).unwrap(), &i).unwrap(), &e).unwrap().entries;
        prop_assert_eq!(&all, &ehi);
        prop_assert_eq!(&all, &ieh);
        prop_assert_eq!(&all, &hie);
        Ok(())
    })
}

fn starts_from(scheme: &LevelScheme, picks: &BTreeSet<usize>) -> Vec<EnergyValue> {
    picks.iter().filter(|&&i| i < scheme.levels.len()).map(|&i| scheme.levels[i].energy).collect()
}

pub fn cascade_monotone(cases: u32) -> Result<(), String> {
    let s = (
        any_scheme(),
        proptest::collection::btree_set(0usize..25, 0..6),
        proptest::collection::btree_set(0usize..25, 0..6),
    );
    run(cases, s, |(scheme, a, extra)| {
        let small = starts_from(&scheme, &a);
        let big_set: BTreeSet<usize> = a.union(&extra).copied().collect();
        let big = starts_from(&scheme, &big_set);
        let vs = cascade_visit(&small, &scheme);
        let vb = cascade_visit(&big, &scheme);
        prop_assert!(vs.indices.is_subset(&vb.indices));
        for s in &small {
            prop_assert!(vs.indices.contains(&scheme.resolve(s).unwrap()));
        }
        Ok(())
    })
}

pub fn cascade_idempotent(cases: u32) -> Result<(), String> {
    let s = (any_scheme(), proptest::collection::btree_set(0usize..25, 0..6));
    run(cases, s, |(scheme, a)| {
        let once = cascade_visit(&starts_from(&scheme, &a), &scheme);
        let twice = cascade_visit(&once.levels, &scheme);
        prop_assert_eq!(once, twice);
        Ok(())
    })
}

pub fn csv_identity(cases: u32) -> Result<(), String> {
    run(cases, any_library(), |lib| {
        let text = render_table(&lib, ExportFormat::Csv);
        let back = parse_csv(&text, lib.radiation).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&back, &lib);
        prop_assert_eq!(render_table(&back, ExportFormat::Csv), text);
        Ok(())
    })
}

/// Termination, visited-set bound and edge completeness on graphs with cycles.
pub fn walk_terminates(cases: u32) -> Result<(), String> {
    run(cases, (any_graph(30), 1usize..40), |(g, cap)| {
        let src = g.source();
        let opts = ChainOptions { depth_cap: cap, ..Default::default() };
        let reach = g.reachable(0);
        match walk(&node(0), &src, &opts) {
            Ok(w) => {
                prop_assert!(reach.len() <= cap);
                let order: BTreeSet<Nuclide> = w.order.iter().copied().collect();
                prop_assert_eq!(order.len(), w.order.len());
                prop_assert_eq!(order, reach.iter().map(|&i| node(i)).collect::<BTreeSet<_>>());
                let want: BTreeSet<(Nuclide, Nuclide)> =
                    g.edges.iter().filter(|e| reach.contains(&e.0)).map(|e| (node(e.0), node(e.1))).collect();
                let got: Vec<(Nuclide, Nuclide)> = w.edges.iter().map(|e| (e.parent, e.daughter)).collect();
                prop_assert_eq!(got.len(), want.len());
                prop_assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), want);
            }
            Err(ChainError::DepthExceeded { .. }) => prop_assert!(reach.len() > cap),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
        Ok(())
    })
}

pub fn kind_order_independent(cases: u32) -> Result<(), String> {
    let s = (any_graph(15), Just(RadiationType::ALL.to_vec()).prop_shuffle());
    run(cases, s, |(g, order)| {
        let src = g.source();
        let shuffled = ChainOptions { kind_order: order.try_into().unwrap(), ..Default::default() };
        let a = walk(&node(0), &src, &ChainOptions::default()).unwrap();
        let b = walk(&node(0), &src, &shuffled).unwrap();
        let edges = |w: &radlib::chain::Walk| {
            w.edges
                .iter()
                .map(|e| (e.parent, e.daughter, e.branching_percent.map(f64::to_bits)))
                .collect::<BTreeSet<_>>()
        };
        prop_assert_eq!(a.order.iter().collect::<BTreeSet<_>>(), b.order.iter().collect::<BTreeSet<_>>());
        prop_assert_eq!(edges(&a), edges(&b));
        prop_assert_eq!(a.terminal, b.terminal);
        Ok(())
    })
}

pub fn daughters_order_independent(cases: u32) -> Result<(), String> {
    let rec = (0usize..6, any::<bool>(), 1u32..1000, 0u32..4).prop_map(|(d, alpha, br, lvl)| {
        let mode = if alpha { DecayMode::Alpha } else { DecayMode::BetaMinus };
        let mut r = synthetic_record(node(10), node(d), mode, br as f64 / 10.0);
        r.parent_level = EnergyValue::exact(lvl as f64 * 10.0);
        r.daughter_feeding_level = Some(EnergyValue::exact((br % 7) as f64 * 100.0));
        r
    });
    let s = proptest::collection::vec(rec, 0..20).prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle()));
    run(cases, s, |(a, b)| {
        let key = |v: &[DecayRecord]| {
            extract_daughters(v)
                .into_iter()
                .map(|l| {
                    let lv: Vec<u64> = l.feeding_levels.iter().map(|e| e.kev.to_bits()).collect();
                    (l.nuclide, (lv, l.branching_percent.map(f64::to_bits), l.modes))
                })
                .collect::<BTreeMap<_, _>>()
        };
        prop_assert_eq!(key(&a), key(&b));
        Ok(())
    })
}

/// Parsers return a value or an error on arbitrary text; they never panic.
pub fn parsers_total(cases: u32) -> Result<(), String> {
    let header = radlib::export::CSV_COLUMNS.join(",");
    let text = prop_oneof![
        any::<String>(),
        proptest::collection::vec("[-0-9a-z.,;@ \"\n]{0,30}", 0..8)
            .prop_map(move |rows| format!("{header}\n{}", rows.join("\n"))),
    ];
    run(cases, text, |t| {
        let _ = parse_csv(&t, RadiationType::Gamma);
        let _ = PeakList::parse(&t);
        let _ = parse_nuclide_id(&t);
        let _ = radlib::config::parse_config(&t, std::path::Path::new("."));
        Ok(())
    })
}

pub fn qualify_properties(cases: u32) -> Result<(), String> {
    let peaks = proptest::collection::vec(0.0f64..12_000.0, 0..10);
    let s = (any_library(), peaks, 0.0f64..50.0, 0.0f64..50.0).prop_flat_map(|(l, p, a, b)| {
        (Just(l), Just(p.clone()), Just(p).prop_shuffle(), Just(a.min(b)), Just(a.max(b)))
    });
    run(cases, s, |(lib, p, shuffled, lo, hi)| {
        let list =
            |v: &[f64]| PeakList { peaks: v.iter().map(|&c| Peak { centroid_kev: c, net_area: None }).collect() };
        let narrow = qualify_peaks(&list(&p), &lib, lo);
        let wide = qualify_peaks(&list(&p), &lib, hi);
        for (n, w) in narrow.iter().zip(&wide) {
            for c in &n.candidates {
                prop_assert!(w.candidates.iter().any(|x| x.entry == c.entry));
            }
        }
        let other = qualify_peaks(&list(&shuffled), &lib, lo);
        let by_peak = |m: &[radlib::identify::PeakMatch]| {
            let mut v: Vec<String> = m.iter().map(|x| format!("{:?}", x)).collect();
            v.sort();
            v
        };
        prop_assert_eq!(by_peak(&narrow), by_peak(&other));
        Ok(())
    })
}
