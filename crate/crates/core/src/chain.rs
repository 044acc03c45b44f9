//! Recursive decay-chain construction, subset algebra and lineage trees.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levels::{resolve_level_spec, LevelError, NuclideLevels, ValidationOptions};
use crate::model::{DecayMode, EnergyValue, Nuclide, RadiationType};
use crate::normalize::{extract_daughters, DecayRecord, LevelScheme};

pub const DEFAULT_DEPTH_CAP: usize = 500;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("data unavailable: {0}")]
    DataUnavailable(String),
    #[error("visited more than {cap} nuclides")]
    DepthExceeded { cap: usize },
    #[error("the radionuclide subset is empty")]
    EmptySubset,
    #[error(transparent)]
    Level(#[from] LevelError),
}

/// Decay records and level schemes by nuclide.
pub trait DecaySource: Sync {
    /// Records of one radiation type; empty when the dataset is absent.
    fn decay_records(&self, nuclide: &Nuclide, radiation: RadiationType) -> Result<Arc<Vec<DecayRecord>>, ChainError>;

    fn level_scheme(&self, nuclide: &Nuclide) -> Result<Option<Arc<LevelScheme>>, ChainError>;

    /// Hint that every dataset of `nuclide` is about to be read.
    fn prefetch(&self, _nuclide: &Nuclide) -> Result<(), ChainError> {
        Ok(())
    }
}

/// In-memory source for synthetic corpora.
#[derive(Debug, Clone, Default)]
pub struct MemorySource {
    pub records: HashMap<(Nuclide, RadiationType), Arc<Vec<DecayRecord>>>,
    pub schemes: HashMap<Nuclide, Arc<LevelScheme>>,
}

impl MemorySource {
    pub fn add_record(&mut self, r: DecayRecord) {
        let key = (r.parent.erased(), r.radiation);
        Arc::make_mut(self.records.entry(key).or_default()).push(r);
    }

    pub fn add_scheme(&mut self, s: LevelScheme) {
        self.schemes.insert(s.nuclide.erased(), Arc::new(s));
    }
}

impl DecaySource for MemorySource {
    fn decay_records(&self, nuclide: &Nuclide, radiation: RadiationType) -> Result<Arc<Vec<DecayRecord>>, ChainError> {
        Ok(self.records.get(&(nuclide.erased(), radiation)).cloned().unwrap_or_default())
    }

    fn level_scheme(&self, nuclide: &Nuclide) -> Result<Option<Arc<LevelScheme>>, ChainError> {
        Ok(self.schemes.get(&nuclide.erased()).cloned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub depth_cap: usize,
    pub validation: ValidationOptions,
    /// Order in which radiation kinds are queried per nuclide.
    pub kind_order: [RadiationType; 6],
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            depth_cap: DEFAULT_DEPTH_CAP,
            validation: ValidationOptions::default(),
            kind_order: RadiationType::ALL,
        }
    }
}

fn all_records(
    source: &dyn DecaySource,
    n: &Nuclide,
    order: &[RadiationType; 6],
) -> Result<Vec<DecayRecord>, ChainError> {
    let mut out = Vec::new();
    for r in order {
        out.extend(source.decay_records(n, *r)?.iter().cloned());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub parent: Nuclide,
    pub daughter: Nuclide,
    pub branching_percent: Option<f64>,
    pub modes: Vec<DecayMode>,
}

/// Result of the level-erased traversal from one progenitor.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    pub progenitor: Nuclide,
    /// Level-erased nuclides in discovery order, terminals included.
    pub order: Vec<Nuclide>,
    pub edges: Vec<Edge>,
    /// Nuclides without any decay data.
    pub terminal: BTreeSet<Nuclide>,
    /// Parent whose expansion first reached each nuclide.
    pub expanded_by: HashMap<Nuclide, Option<Nuclide>>,
}

/// f(j) = g(j) ∪ f(j+1), depth-first with an explicit stack.
pub fn walk(progenitor: &Nuclide, source: &dyn DecaySource, opts: &ChainOptions) -> Result<Walk, ChainError> {
    let root = progenitor.erased();
    let mut w = Walk {
        progenitor: *progenitor,
        order: Vec::new(),
        edges: Vec::new(),
        terminal: BTreeSet::new(),
        expanded_by: HashMap::new(),
    };
    let mut visited: HashSet<Nuclide> = HashSet::new();
    let mut stack: Vec<(Nuclide, Option<Nuclide>)> = vec![(root, None)];
    while let Some((n, from)) = stack.pop() {
        if visited.contains(&n) {
            continue;
        }
        if visited.len() >= opts.depth_cap {
            return Err(ChainError::DepthExceeded { cap: opts.depth_cap });
        }
        visited.insert(n);
        w.order.push(n);
        w.expanded_by.insert(n, from);
        source.prefetch(&n)?;
        let records = all_records(source, &n, &opts.kind_order)?;
        if records.is_empty() {
            w.terminal.insert(n);
            continue;
        }
        let links = extract_daughters(&records);
        for l in &links {
            w.edges.push(Edge {
                parent: n,
                daughter: l.nuclide,
                branching_percent: l.branching_percent,
                modes: l.modes.clone(),
            });
        }
        for l in links.iter().rev() {
            if !visited.contains(&l.nuclide) {
                stack.push((l.nuclide, Some(n)));
            }
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageChild {
    pub branching_percent: Option<f64>,
    /// Expanded under another parent; listed here without its subtree.
    pub reference: bool,
    pub tree: LineageTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageTree {
    pub root: Nuclide,
    pub children: Vec<LineageChild>,
}

impl LineageTree {
    pub fn leaf(root: Nuclide) -> Self {
        LineageTree { root, children: Vec::new() }
    }

    /// (parent, daughter) pairs in render order.
    pub fn edges(&self) -> Vec<(Nuclide, Nuclide)> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            for c in &t.children {
                out.push((t.root.erased(), c.tree.root));
            }
            stack.extend(t.children.iter().rev().map(|c| &c.tree));
        }
        out
    }
}

/// Lineage tree of a walk; terminal daughters are omitted.
pub fn lineage_tree(w: &Walk) -> LineageTree {
    // A nuclide is expanded at its first appearance in printed (pre-order) order.
    fn node(w: &Walk, n: Nuclide, label: Nuclide, seen: &mut HashSet<Nuclide>) -> LineageTree {
        let mut kids: Vec<&Edge> =
            w.edges.iter().filter(|e| e.parent == n && !w.terminal.contains(&e.daughter)).collect();
        kids.sort_by(|a, b| {
            let x = a.branching_percent.unwrap_or(f64::NEG_INFINITY);
            let y = b.branching_percent.unwrap_or(f64::NEG_INFINITY);
            y.total_cmp(&x)
        });
        let children = kids
            .into_iter()
            .map(|e| {
                let owned = seen.insert(e.daughter);
                LineageChild {
                    branching_percent: e.branching_percent,
                    reference: !owned,
                    tree: if owned { node(w, e.daughter, e.daughter, seen) } else { LineageTree::leaf(e.daughter) },
                }
            })
            .collect();
        LineageTree { root: label, children }
    }
    let root = w.progenitor.erased();
    let mut seen = HashSet::from([root]);
    node(w, root, w.progenitor, &mut seen)
}

fn percent(p: Option<f64>) -> String {
    match p {
        Some(v) => format!("{v}%"),
        None => "?%".to_string(),
    }
}

/// Indented text: one nuclide per line, two spaces per depth, `*` marks a
/// nuclide expanded under another parent.
pub fn render_lineage(tree: &LineageTree) -> String {
    fn go(t: &LineageTree, depth: usize, out: &mut String) {
        for c in &t.children {
            out.push_str(&"  ".repeat(depth));
            out.push_str(&format!("{} ({})", c.tree.root, percent(c.branching_percent)));
            if c.reference {
                out.push_str(" *");
            }
            out.push('\n');
            go(&c.tree, depth + 1, out);
        }
    }
    let mut out = format!("{}\n", tree.root);
    go(tree, 1, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayChain {
    pub progenitor: Nuclide,
    pub members: Vec<Nuclide>,
    /// The progenitor has no decay data.
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadionuclideSubset {
    pub recursive_chains: Vec<DecayChain>,
    pub lineages: Vec<LineageTree>,
    pub statics: Vec<Nuclide>,
    pub exclusions: Vec<Nuclide>,
    pub members: Vec<Nuclide>,
    /// Validated levels of every nuclide touched while assembling.
    pub atlas: BTreeMap<Nuclide, NuclideLevels>,
    pub warnings: Vec<String>,
}

impl RadionuclideSubset {
    pub fn levels(&self, n: &Nuclide) -> Option<&NuclideLevels> {
        self.atlas.get(&n.erased())
    }
}

/// Chain and lineage for a single progenitor.
pub fn build_progeny(
    progenitor: &Nuclide,
    source: &dyn DecaySource,
    opts: &ChainOptions,
) -> Result<(DecayChain, LineageTree), ChainError> {
    let mut s = assemble_subset(&[*progenitor], &[], &[], source, opts)?;
    Ok((s.recursive_chains.remove(0), s.lineages.remove(0)))
}

struct Memo<'a> {
    source: &'a dyn DecaySource,
    order: [RadiationType; 6],
    records: HashMap<Nuclide, Arc<Vec<DecayRecord>>>,
}

impl Memo<'_> {
    fn records(&mut self, n: &Nuclide) -> Result<Arc<Vec<DecayRecord>>, ChainError> {
        if let Some(r) = self.records.get(n) {
            return Ok(r.clone());
        }
        let r = Arc::new(all_records(self.source, n, &self.order)?);
        self.records.insert(*n, r.clone());
        Ok(r)
    }
}

/// Whether a record's parent level is an allowed emitting level of its parent.
pub fn parent_level_allowed(levels: Option<&NuclideLevels>, level: &EnergyValue) -> bool {
    let Some(l) = levels else { return true };
    match l.resolve(level) {
        Some(i) => l.is_feasible_index(i),
        None => l.scheme.is_none() || l.matches_orphan(level),
    }
}

/// X = (R ∪ Y ∪ S) \ E with level validation of every touched nuclide.
pub fn assemble_subset(
    recursive: &[Nuclide],
    statics: &[Nuclide],
    exclusions: &[Nuclide],
    source: &dyn DecaySource,
    opts: &ChainOptions,
) -> Result<RadionuclideSubset, ChainError> {
    let mut memo = Memo { source, order: opts.kind_order, records: HashMap::new() };
    let mut warnings = Vec::new();
    let walks: Vec<Walk> = recursive.iter().map(|r| walk(r, source, opts)).collect::<Result<_, _>>()?;

    // Graph over every nuclide whose levels matter.
    let mut nodes: Vec<Nuclide> = Vec::new();
    let mut seen: HashSet<Nuclide> = HashSet::new();
    let mut parents: HashMap<Nuclide, Vec<Nuclide>> = HashMap::new();
    let add_edge = |p: Nuclide, d: Nuclide, parents: &mut HashMap<Nuclide, Vec<Nuclide>>| {
        let v = parents.entry(d).or_default();
        if !v.contains(&p) {
            v.push(p);
        }
    };
    for w in &walks {
        for n in &w.order {
            if seen.insert(*n) {
                nodes.push(*n);
            }
        }
        for e in &w.edges {
            add_edge(e.parent, e.daughter, &mut parents);
        }
    }
    for s in statics {
        let n = s.erased();
        if seen.insert(n) {
            nodes.push(n);
        }
        for l in extract_daughters(&memo.records(&n)?) {
            if seen.insert(l.nuclide) {
                nodes.push(l.nuclide);
            }
            add_edge(n, l.nuclide, &mut parents);
        }
    }
    let mut seeds: HashMap<Nuclide, Vec<Nuclide>> = HashMap::new();
    for n in recursive.iter().chain(statics) {
        seeds.entry(n.erased()).or_default().push(*n);
    }

    // Parents before daughters; a cycle falls back to discovery order.
    let mut indeg: HashMap<Nuclide, usize> =
        nodes.iter().map(|n| (*n, parents.get(n).map_or(0, |p| p.iter().filter(|x| *x != n).count()))).collect();
    let mut children: HashMap<Nuclide, Vec<Nuclide>> = HashMap::new();
    for (d, ps) in &parents {
        for p in ps {
            if p != d {
                children.entry(*p).or_default().push(*d);
            }
        }
    }
    let mut topo: Vec<Nuclide> = Vec::new();
    let mut placed: HashSet<Nuclide> = HashSet::new();
    let mut queue: VecDeque<Nuclide> = nodes.iter().filter(|n| indeg[n] == 0).copied().collect();
    loop {
        while let Some(n) = queue.pop_front() {
            if !placed.insert(n) {
                continue;
            }
            topo.push(n);
            for c in children.get(&n).into_iter().flatten() {
                let d = indeg.get_mut(c).expect("node");
                *d = d.saturating_sub(1);
                if *d == 0 {
                    queue.push_back(*c);
                }
            }
        }
        match nodes.iter().find(|n| !placed.contains(*n)) {
            Some(n) => queue.push_back(*n),
            None => break,
        }
    }

    let mut atlas: BTreeMap<Nuclide, NuclideLevels> = BTreeMap::new();
    for n in &topo {
        let scheme = source.level_scheme(n)?.map(|s| (*s).clone());
        let mut inherited: Vec<EnergyValue> = Vec::new();
        for s in seeds.get(n).into_iter().flatten() {
            inherited.push(resolve_level_spec(s, scheme.as_ref(), &opts.validation)?);
        }
        let mut unrestricted: Vec<EnergyValue> = Vec::new();
        for p in parents.get(n).into_iter().flatten() {
            let recs = memo.records(p)?;
            let to_n: Vec<DecayRecord> = recs.iter().filter(|r| r.daughter == *n).cloned().collect();
            let plevels = atlas.get(p);
            let allowed: Vec<DecayRecord> =
                to_n.iter().filter(|r| parent_level_allowed(plevels, &r.parent_level)).cloned().collect();
            if let Some(l) = extract_daughters(&allowed).into_iter().next() {
                inherited.extend(l.feeding_levels);
            }
            if let Some(l) = extract_daughters(&to_n).into_iter().next() {
                unrestricted.extend(l.feeding_levels);
            }
        }
        if inherited.is_empty() && !unrestricted.is_empty() {
            warnings.push(format!("{n}: no feasible feeding level, using all fed levels"));
            inherited = unrestricted;
        }
        if inherited.is_empty() {
            inherited.push(EnergyValue::GROUND);
        }
        let levels = NuclideLevels::build(n, &inherited, scheme, &opts.validation);
        for o in &levels.flat.orphans {
            warnings.push(format!("{n}: level {} keV not in level data, radiation unvalidated", o.kev));
        }
        atlas.insert(*n, levels);
    }

    let canonical = |x: &Nuclide| -> Nuclide {
        let Some(l) = atlas.get(&x.erased()) else { return *x };
        let Ok(e) = resolve_level_spec(x, l.scheme.as_ref(), &opts.validation) else { return *x };
        match l.resolve(&e) {
            Some(i) => x.with_level(l.member_spec(i)),
            None => *x,
        }
    };

    let mut chains = Vec::new();
    let mut lineages = Vec::new();
    for w in &walks {
        let prog = canonical(&w.progenitor);
        let root = prog.erased();
        let mut members = vec![prog];
        let terminal = w.terminal.contains(&root);
        for n in &w.order {
            if w.terminal.contains(n) {
                continue;
            }
            for m in decaying_members(n, atlas.get(n), &memo.records(n)?, &mut warnings) {
                if !members.contains(&m) {
                    members.push(m);
                }
            }
        }
        chains.push(DecayChain { progenitor: prog, members, terminal });
        let mut tree = lineage_tree(w);
        tree.root = prog;
        lineages.push(tree);
    }

    let statics: Vec<Nuclide> = statics.iter().map(canonical).collect();
    let exclusions: Vec<Nuclide> = exclusions.iter().map(canonical).collect();
    let mut members: Vec<Nuclide> = Vec::new();
    for m in chains.iter().flat_map(|c| c.members.iter()).chain(statics.iter()) {
        if !members.contains(m) && !exclusions.contains(m) {
            members.push(*m);
        }
    }
    if members.is_empty() {
        return Err(ChainError::EmptySubset);
    }
    Ok(RadionuclideSubset { recursive_chains: chains, lineages, statics, exclusions, members, atlas, warnings })
}

/// Feasible levels of `n` that decay, highest energy first.
fn decaying_members(
    n: &Nuclide,
    levels: Option<&NuclideLevels>,
    records: &[DecayRecord],
    warnings: &mut Vec<String>,
) -> Vec<Nuclide> {
    let mut out = Vec::new();
    if let Some(l) = levels {
        if let Some(s) = &l.scheme {
            let mut decaying: BTreeSet<usize> =
                l.outcomes.iter().filter(|o| o.feasible && !o.modes.is_empty()).map(|o| o.index).collect();
            for r in records {
                if let Some(i) = s.resolve(&r.parent_level) {
                    if l.is_feasible_index(i) {
                        decaying.insert(i);
                    }
                }
            }
            for i in decaying.into_iter().rev() {
                out.push(n.with_level(l.member_spec(i)));
            }
        }
    }
    if out.is_empty() {
        warnings.push(format!("{n}: decay data without a feasible decaying level, ground state assumed"));
        out.push(*n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Tolerance;
    use crate::normalize::{Intensity, LevelRecord};

    fn nuc(s: &str) -> Nuclide {
        s.parse().unwrap()
    }

    fn rec(parent: &str, daughter: &str, mode: DecayMode, br: f64) -> DecayRecord {
        let rad = match mode {
            DecayMode::Alpha => RadiationType::Alpha,
            _ => RadiationType::BetaMinus,
        };
        DecayRecord {
            parent: nuc(parent),
            parent_level: EnergyValue::GROUND,
            parent_level_offset: None,
            parent_half_life: None,
            radiation: rad,
            energy: EnergyValue::exact(100.0),
            energy_uncertainty_reported: false,
            intensity: Some(Intensity { percent: br, uncertainty: 0.0, uncertainty_reported: false }),
            start_level: None,
            end_level: None,
            label: None,
            daughter: nuc(daughter),
            daughter_feeding_level: Some(EnergyValue::GROUND),
            decay_mode: mode,
            branching_percent: Some(br),
            row: 0,
        }
    }

    fn ground_scheme(n: &str) -> LevelScheme {
        LevelScheme {
            nuclide: nuc(n),
            levels: vec![LevelRecord {
                nuclide: nuc(n),
                energy: EnergyValue::GROUND,
                offset: None,
                jpi: None,
                half_life: None,
                isomer: None,
                decay_modes: Vec::new(),
            }],
            transitions: Vec::new(),
            tolerance: Tolerance::default(),
        }
    }

    #[test]
    fn three_nuclide_chain() {
        let mut src = MemorySource::default();
        src.add_record(rec("10b", "10c", DecayMode::BetaMinus, 100.0));
        src.add_record(rec("10c", "10n", DecayMode::BetaMinus, 100.0));
        let (chain, tree) = build_progeny(&nuc("10b"), &src, &Default::default()).unwrap();
        assert_eq!(chain.members, vec![nuc("10b"), nuc("10c")]);
        assert_eq!(tree.edges(), vec![(nuc("10b"), nuc("10c"))]);
        assert_eq!(render_lineage(&tree), "10b\n  10c (100%)\n");
    }

    #[test]
    fn stable_progenitor() {
        let mut src = MemorySource::default();
        src.add_scheme(ground_scheme("208pb"));
        let (chain, tree) = build_progeny(&nuc("208pb"), &src, &Default::default()).unwrap();
        assert_eq!(chain.members, vec![nuc("208pb")]);
        assert!(chain.terminal);
        assert!(tree.children.is_empty());
        assert_eq!(render_lineage(&tree), "208pb\n");
    }

    #[test]
    fn branch_order_and_convergence() {
        let mut src = MemorySource::default();
        src.add_record(rec("213bi", "209tl", DecayMode::Alpha, 2.2));
        src.add_record(rec("213bi", "213po", DecayMode::BetaMinus, 97.8));
        src.add_record(rec("213po", "209pb", DecayMode::Alpha, 100.0));
        src.add_record(rec("209tl", "209pb", DecayMode::BetaMinus, 100.0));
        src.add_record(rec("209pb", "209bi", DecayMode::BetaMinus, 100.0));
        let (chain, tree) = build_progeny(&nuc("213bi"), &src, &Default::default()).unwrap();
        // Alpha rows are read first, so 209Tl is discovered first.
        assert_eq!(chain.members[1], nuc("209tl"));
        let text = render_lineage(&tree);
        assert_eq!(text, "213bi\n  213po (97.8%)\n    209pb (100%)\n  209tl (2.2%)\n    209pb (100%) *\n");
        let mut edges = tree.edges();
        edges.sort();
        let before = edges.len();
        edges.dedup();
        assert_eq!(before, edges.len());
        assert_eq!(edges.len(), 4);
    }

    #[test]
    fn depth_cap() {
        let mut src = MemorySource::default();
        src.add_record(rec("10b", "10c", DecayMode::BetaMinus, 100.0));
        src.add_record(rec("10c", "10n", DecayMode::BetaMinus, 100.0));
        src.add_record(rec("10n", "10o", DecayMode::BetaMinus, 100.0));
        let opts = ChainOptions { depth_cap: 2, ..Default::default() };
        assert_eq!(build_progeny(&nuc("10b"), &src, &opts).unwrap_err(), ChainError::DepthExceeded { cap: 2 });
    }

    #[test]
    fn cycles_terminate() {
        let mut src = MemorySource::default();
        src.add_record(rec("10b", "10c", DecayMode::BetaMinus, 100.0));
        src.add_record(rec("10c", "10b", DecayMode::BetaMinus, 100.0));
        let (chain, tree) = build_progeny(&nuc("10b"), &src, &Default::default()).unwrap();
        assert_eq!(chain.members.len(), 2);
        assert_eq!(tree.edges().len(), 2);
    }

    #[test]
    fn empty_subset() {
        let src = MemorySource::default();
        assert_eq!(assemble_subset(&[], &[], &[], &src, &Default::default()).unwrap_err(), ChainError::EmptySubset);
        let mut src = MemorySource::default();
        src.add_record(rec("10b", "10c", DecayMode::BetaMinus, 100.0));
        src.add_record(rec("10c", "10n", DecayMode::BetaMinus, 100.0));
        let r = assemble_subset(&[nuc("10b")], &[], &[nuc("10b")], &src, &Default::default()).unwrap();
        assert_eq!(r.members, vec![nuc("10c")]);
    }

    #[test]
    fn statics_have_no_descendants() {
        let mut src = MemorySource::default();
        src.add_record(rec("10b", "10c", DecayMode::BetaMinus, 100.0));
        src.add_record(rec("10c", "10n", DecayMode::BetaMinus, 100.0));
        let s = assemble_subset(&[], &[nuc("10b")], &[], &src, &Default::default()).unwrap();
        assert_eq!(s.members, vec![nuc("10b")]);
    }
}
