//! Acceptance checks, one line per criterion. Exits nonzero if any fails.
//!
//! Criterion 11 needs the distributed corpus files; point
//! `TRIPLEKIT_RELEASE_DATA` at a file or directory of `.json`/`.xml` files,
//! or place them under `data/release/` in the workspace. It is skipped
//! otherwise.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use triplekit::adapters::e2e::DropReason;
use triplekit::adapters::{
    e2e_to_tripleset, filter_sql, E2eOutcome, MeaningRepresentation, SqlFilter, SqlQuery,
};
use triplekit::corpus_ops::compute_stats;
use triplekit::formats::{linearize, read_release_json, read_xml, write_xml};
use triplekit::rng::{stream, StreamRng};
use triplekit::sampler::{sample_component, walk_from, SamplerConfig};
use triplekit::splitkit::{propagate_splits, Split, SplitAssignment, SplitConfig, TableSignature};
use triplekit::tripler::{highlight_to_tripleset, TriplerError};
use triplekit::unify::{unify_tripleset, unique_predicates, PredicateMap};
use triplekit::{
    assemble_entry, build_tree, complete_subtree, extract_triples, instantiate, Annotator,
    CorpusEntry, EntryError, Highlight, NodeRef, OntologyAnnotation, OntologyTree, ParentRef,
    Provenance, Realization, Table, TableSource, TitleShape, Triple, TripleSet,
};

enum Verdict {
    Pass(String),
    Skip(String),
}

type Check = Result<Verdict, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

// ---------------------------------------------------------------- helpers

fn table(id: &str, title: &str, headers: &[&str], rows: &[&[&str]]) -> Table {
    Table::new(
        id,
        title,
        headers.iter().map(|h| h.to_string()).collect(),
        rows.iter()
            .map(|r| r.iter().map(|c| c.to_string()).collect())
            .collect(),
        TableSource::Synthetic,
    )
    .unwrap()
}

/// A random annotated table whose tree has at most `max_nodes` nodes
/// (root and title included).
fn random_tree(rng: &mut StreamRng, max_nodes: usize) -> (Table, OntologyTree) {
    let with_title = rng.random_bool(0.5);
    let max_columns = max_nodes - 1 - usize::from(with_title);
    let m = rng.random_range(1..=max_columns);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut parents = vec![ParentRef::RootChild; m];
    for (k, &column) in order.iter().enumerate() {
        let choices = 1 + usize::from(with_title) + k;
        let pick = rng.random_range(0..choices);
        parents[column] = if pick == 0 {
            ParentRef::RootChild
        } else if with_title && pick == 1 {
            ParentRef::TitleChild
        } else {
            ParentRef::Column(order[pick - 1 - usize::from(with_title)])
        };
    }
    let headers: Vec<String> = (0..m).map(|i| format!("H{i}")).collect();
    let row: Vec<String> = (0..m).map(|i| format!("v{i}")).collect();
    let t = Table::new(
        "rt",
        if with_title { "Random title" } else { "" },
        headers,
        vec![row],
        TableSource::Synthetic,
    )
    .unwrap();
    let a = OntologyAnnotation::new("rt", parents, TitleShape::TitleUnderRoot).unwrap();
    let tree = build_tree(&t, &a).unwrap();
    (t, tree)
}

struct Indexed {
    nodes: Vec<NodeRef>,
    parent: Vec<Option<usize>>,
}

impl Indexed {
    fn new(tree: &OntologyTree) -> Self {
        let nodes: Vec<NodeRef> = tree.nodes().collect();
        let pos = |n: NodeRef| nodes.iter().position(|&x| x == n).unwrap();
        let parent = nodes.iter().map(|&n| tree.parent(n).map(pos)).collect();
        Indexed { nodes, parent }
    }

    fn mask(&self, set: &BTreeSet<NodeRef>) -> u32 {
        set.iter()
            .map(|n| 1u32 << self.nodes.iter().position(|x| x == n).unwrap())
            .sum()
    }

    fn set(&self, mask: u32) -> BTreeSet<NodeRef> {
        (0..self.nodes.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.nodes[i])
            .collect()
    }

    /// A node set of a tree is connected iff exactly one member has its
    /// parent outside the set.
    fn connected(&self, mask: u32) -> bool {
        (0..self.nodes.len())
            .filter(|&i| mask & (1 << i) != 0)
            .filter(|&i| self.parent[i].is_none_or(|p| mask & (1 << p) == 0))
            .count()
            == 1
    }

    /// The unique smallest connected superset, found by enumeration.
    fn minimal_connected_superset(&self, h: u32) -> Result<u32, String> {
        let all = (1u32 << self.nodes.len()) - 1;
        let free = all & !h;
        let mut best: Vec<u32> = Vec::new();
        let mut best_size = u32::MAX;
        let mut extra = free;
        loop {
            let s = h | extra;
            if self.connected(s) {
                let size = s.count_ones();
                if size < best_size {
                    best_size = size;
                    best.clear();
                }
                if size == best_size {
                    best.push(s);
                }
            }
            if extra == 0 {
                break;
            }
            extra = (extra - 1) & free;
        }
        match best.as_slice() {
            [one] => Ok(*one),
            other => Err(format!("{} minimal supersets", other.len())),
        }
    }
}

fn jaccard_oracle(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let a: HashSet<&String> = a.iter().collect();
    let b: HashSet<&String> = b.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(&b).count() as f64 / union as f64
    }
}

fn separation_violations(
    sigs: &[TableSignature],
    split: &SplitAssignment,
    threshold: f64,
) -> usize {
    let mut bad = 0;
    for a in sigs {
        for b in sigs {
            let (sa, sb) = (
                split.get(&a.table_id).unwrap(),
                split.get(&b.table_id).unwrap(),
            );
            let guarded = (sa == Split::Test && sb != Split::Test)
                || (sa == Split::Dev && sb == Split::Train);
            if guarded && jaccard_oracle(&a.tokens, &b.tokens) > threshold {
                bad += 1;
            }
        }
    }
    bad
}

fn run_cli(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_triplekit"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())
}

fn run_ok(args: &[&str]) -> Result<(), String> {
    let out = run_cli(args)?;
    ensure(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })
}

// ---------------------------------------------------------------- criteria

fn c1_team_tree() -> Check {
    let t = table(
        "teams",
        "",
        &["Team", "Stadium", "City", "Capacity", "Founded"],
        &[&[
            "Amsterdam Admirals",
            "Olympisch Stadion",
            "Amsterdam",
            "22,288",
            "1995",
        ]],
    );
    let a = OntologyAnnotation::new(
        "teams",
        vec![
            ParentRef::RootChild,
            ParentRef::Column(0),
            ParentRef::Column(1),
            ParentRef::Column(1),
            ParentRef::Column(0),
        ],
        TitleShape::TitleUnderRoot,
    )
    .unwrap();
    let tree = build_tree(&t, &a).map_err(|e| e.to_string())?;
    let h = Highlight {
        table_id: "teams".into(),
        row_index: 0,
        nodes: BTreeSet::from([NodeRef::Column(1)]),
    };
    let (ts, _) = highlight_to_tripleset(&tree, &t, &h).map_err(|e| e.to_string())?;
    let want = vec![Triple::new(
        "Amsterdam Admirals",
        "Stadium",
        "Olympisch Stadion",
    )];
    ensure(ts.triples == want, || format!("got {:?}", ts.triples))?;
    Ok(Verdict::Pass(
        "(Amsterdam Admirals, Stadium, Olympisch Stadion)".into(),
    ))
}

fn c2_e2e() -> Check {
    let want = vec![
        Triple::new("Alimentum", "area", "city centre"),
        Triple::new("Alimentum", "familyFriendly", "no"),
    ];
    for text in [
        "name[Alimentum], area[city centre], familyFriendly[no]",
        "(name[Alimentum], area[city centre], familyFriendly[no])",
    ] {
        let mr = MeaningRepresentation::parse(text).map_err(|e| e.to_string())?;
        match e2e_to_tripleset(&mr) {
            E2eOutcome::Converted(ts) => {
                ensure(ts.triples == want, || format!("{text}: {:?}", ts.triples))?
            }
            other => return Err(format!("{text}: {other:?}")),
        }
    }
    let nameless =
        MeaningRepresentation::parse("eatType[pub], area[riverside]").map_err(|e| e.to_string())?;
    ensure(
        e2e_to_tripleset(&nameless) == E2eOutcome::Dropped(DropReason::NoNameSlot),
        || "name-less MR was not dropped".into(),
    )?;
    Ok(Verdict::Pass("two triples; name-less MR dropped".into()))
}

fn c3_unify() -> Check {
    let map = PredicateMap::from_tsv(
        "Hometown\tHOMETOWN\nHome Town\tHOMETOWN\nHome Town/City\tHOMETOWN\n".as_bytes(),
    )
    .map_err(|e| e.to_string())?;
    let ts = TripleSet::new(
        ["Hometown", "Home Town", "Home Town/City"]
            .iter()
            .map(|p| Triple::new("X", *p, "Y"))
            .collect(),
        Provenance::Wikitablequestions,
    );
    let (unified, _) = unify_tripleset(&ts, &map);
    ensure(
        unified.triples.iter().all(|t| t.predicate == "HOMETOWN"),
        || format!("{unified:?}"),
    )?;

    let mut rng = stream(3);
    let pool = [
        "Hometown",
        "Home Town",
        "Home Town/City",
        "HOMETOWN",
        " Hometown ",
        "hometown",
        "year",
        "YEAR",
        "Year",
        "[TITLE]",
        "born in",
        "birth place",
        "BIRTH_PLACE",
        "Ω",
        "",
    ];
    for round in 0..1000 {
        // A random closed map: keys never collide with other keys' targets
        // unless they map to themselves.
        let canon = ["HOMETOWN", "YEAR", "BIRTH_PLACE"];
        let mut pairs: Vec<(String, String)> = Vec::new();
        for raw in [
            "Hometown",
            "Home Town",
            "Home Town/City",
            "year",
            "Year",
            "born in",
            "birth place",
        ] {
            if rng.random_bool(0.6) {
                pairs.push((raw.into(), canon[rng.random_range(0..canon.len())].into()));
            }
        }
        for c in canon {
            if rng.random_bool(0.3) {
                pairs.push((c.into(), c.into()));
            }
        }
        let map = PredicateMap::new(pairs).map_err(|e| format!("round {round}: {e}"))?;
        let n = rng.random_range(1..=10);
        let ts = TripleSet::new(
            (0..n)
                .map(|i| {
                    Triple::new(
                        format!("s{i}"),
                        pool[rng.random_range(0..pool.len())],
                        format!("o|{i}"),
                    )
                })
                .collect(),
            Provenance::Unspecified,
        );
        let (once, _) = unify_tripleset(&ts, &map);
        let (twice, _) = unify_tripleset(&once, &map);
        ensure(once == twice, || format!("round {round}: not idempotent"))?;
        ensure(once.len() == ts.len(), || {
            format!("round {round}: length changed")
        })?;
        ensure(
            once.triples
                .iter()
                .zip(&ts.triples)
                .all(|(a, b)| a.subject == b.subject && a.object == b.object),
            || format!("round {round}: subject/object changed"),
        )?;
        let entry = |ts: TripleSet| CorpusEntry {
            eid: "Id1".into(),
            category: "MISC".into(),
            tripleset: ts,
            realizations: vec![Realization::new("x", Annotator::Internal, "")],
            table_id: None,
            has_empty_value: false,
        };
        ensure(
            unique_predicates(&[entry(once)]).0 <= unique_predicates(&[entry(ts)]).0,
            || format!("round {round}: predicate count grew"),
        )?;
    }
    Ok(Verdict::Pass(
        "3 variants -> HOMETOWN; idempotent on 1000 fuzzed sets".into(),
    ))
}

fn c4_c6_completion() -> (Check, Check) {
    let mut rng = stream(4);
    let mut trees = 0;
    let mut cases = 0usize;
    let mut c4: Result<(), String> = Ok(());
    let mut c6: Result<(), String> = Ok(());
    let mut shapes = HashSet::new();
    while trees < 600 {
        let (t, tree) = random_tree(&mut rng, 8);
        trees += 1;
        let ix = Indexed::new(&tree);
        shapes.insert(ix.parent.clone());
        let assignment = instantiate(&tree, &t, 0).unwrap();
        let root_bit = 1u32 << ix.nodes.iter().position(|&n| n == NodeRef::Root).unwrap();
        let all = (1u32 << ix.nodes.len()) - 1;
        let highlightable = all & !root_bit;
        let mut h = highlightable;
        while h != 0 {
            cases += 1;
            let got = complete_subtree(&tree, &ix.set(h));
            let want = ix.minimal_connected_superset(h);
            if c4.is_ok() {
                c4 = match want {
                    Ok(w) if ix.mask(&got) == w => {
                        let again = complete_subtree(&tree, &got);
                        ensure(again == got, || format!("not idempotent for {got:?}"))
                    }
                    Ok(w) => Err(format!(
                        "highlight {:?}: got {got:?}, want {:?}",
                        ix.set(h),
                        ix.set(w)
                    )),
                    Err(e) => Err(e),
                };
            }
            if c6.is_ok() {
                c6 = match extract_triples(&got, &assignment, &tree) {
                    Ok(ts) => {
                        let expected = got.len() - usize::from(got.contains(&NodeRef::Root));
                        ensure(ts.len() == expected, || {
                            format!("{got:?}: {} triples, want {expected}", ts.len())
                        })
                    }
                    Err(e) => Err(e.to_string()),
                };
            }
            h = (h - 1) & highlightable;
        }
    }

    // Discard rule: more than ten triples is rejected, ten is kept.
    let oversize = || -> Result<(), String> {
        for (columns, keep) in [(10usize, true), (11, false), (14, false)] {
            let headers: Vec<String> = (0..columns).map(|i| format!("c{i}")).collect();
            let row: Vec<String> = (0..columns).map(|i| format!("v{i}")).collect();
            let t = Table::new("w", "", headers, vec![row], TableSource::Synthetic).unwrap();
            let a = OntologyAnnotation::new(
                "w",
                vec![ParentRef::RootChild; columns],
                TitleShape::TitleUnderRoot,
            )
            .unwrap();
            let tree = build_tree(&t, &a).unwrap();
            let h = Highlight {
                table_id: "w".into(),
                row_index: 0,
                nodes: (0..columns).map(NodeRef::Column).collect(),
            };
            match (highlight_to_tripleset(&tree, &t, &h), keep) {
                (Ok((ts, _)), true) => ensure(ts.len() == columns, || "wrong size".into())?,
                (Err(TriplerError::Oversize { count }), false) => {
                    ensure(count == columns, || format!("oversize count {count}"))?
                }
                (other, _) => return Err(format!("{columns} columns: {other:?}")),
            }
        }
        let big = TripleSet::new(
            (0..11)
                .map(|i| Triple::new("s", format!("p{i}"), "o"))
                .collect(),
            Provenance::Synthetic,
        );
        let r = vec![Realization::new("text", Annotator::Internal, "")];
        ensure(
            matches!(
                assemble_entry(big, r, "MISC", "Id1"),
                Err(EntryError::Oversize { count: 11 })
            ),
            || "assemble_entry accepted 11 triples".into(),
        )
    };
    let c6 = c6.and_then(|()| oversize());
    (
        c4.map(|()| {
            Verdict::Pass(format!(
                "{trees} trees ({} shapes), {cases} highlight subsets",
                shapes.len()
            ))
        }),
        c6.map(|()| Verdict::Pass(format!("{cases} subsets; >10 triples rejected"))),
    )
}

fn c5_sampler() -> Check {
    let mut rng = stream(5);
    for i in 0..10_000u64 {
        let (_, tree) = random_tree(&mut rng, 25);
        let size_min = rng.random_range(1..=6);
        let size_max = rng.random_range(size_min..=10);
        let p_min: f64 = rng.random();
        let p_max = rng.random_range(p_min..=1.0);
        let config = SamplerConfig {
            size_min,
            size_max,
            p_min,
            p_max,
            seed: i,
        };
        let c = sample_component(&tree, &config, &mut stream(i)).map_err(|e| e.to_string())?;
        let available = tree.nodes().filter(|&n| n != NodeRef::Root).count();
        ensure(!c.nodes.contains(&NodeRef::Root), || {
            format!("sample {i}: root in component")
        })?;
        ensure(
            c.nodes.iter().all(|&n| {
                tree.parent(n)
                    .is_some_and(|p| p == NodeRef::Root || c.nodes.contains(&p))
            }),
            || format!("sample {i}: {:?} is not connected", c.nodes),
        )?;
        let mut completed = complete_subtree(&tree, &c.nodes);
        completed.remove(&NodeRef::Root);
        ensure(completed == c.nodes, || {
            format!("sample {i}: completion added nodes")
        })?;
        ensure((size_min..=size_max).contains(&c.target_size), || {
            format!("sample {i}: target")
        })?;
        ensure((p_min..=p_max).contains(&c.p_used), || {
            format!("sample {i}: p")
        })?;
        ensure(c.size() == c.target_size.min(available), || {
            format!(
                "sample {i}: size {} for target {} of {available}",
                c.size(),
                c.target_size
            )
        })?;
    }

    // Chain of six columns: p = 1 walks straight down.
    let chain_t = table(
        "chain",
        "",
        &["a", "b", "c", "d", "e", "f"],
        &[&["1", "2", "3", "4", "5", "6"]],
    );
    let chain_a = OntologyAnnotation::new(
        "chain",
        (0..6)
            .map(|i| {
                if i == 0 {
                    ParentRef::RootChild
                } else {
                    ParentRef::Column(i - 1)
                }
            })
            .collect(),
        TitleShape::TitleUnderRoot,
    )
    .unwrap();
    let chain = build_tree(&chain_t, &chain_a).unwrap();
    // Star: every column under the root, each with one child of its own.
    let star_t = table(
        "star",
        "",
        &[
            "a", "b", "c", "d", "e", "f", "a1", "b1", "c1", "d1", "e1", "f1",
        ],
        &[&[
            "1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12",
        ]],
    );
    let star_a = OntologyAnnotation::new(
        "star",
        (0..12)
            .map(|i| {
                if i < 6 {
                    ParentRef::RootChild
                } else {
                    ParentRef::Column(i - 6)
                }
            })
            .collect(),
        TitleShape::TitleUnderRoot,
    )
    .unwrap();
    let star = build_tree(&star_t, &star_a).unwrap();
    for seed in 0..500u64 {
        let mut config = SamplerConfig {
            size_min: 1,
            size_max: 6,
            p_min: 1.0,
            p_max: 1.0,
            seed,
        };
        let c = sample_component(&chain, &config, &mut stream(seed)).map_err(|e| e.to_string())?;
        let depths: Vec<usize> = c
            .nodes
            .iter()
            .map(|&n| chain.depth_of(n).unwrap())
            .collect();
        let want: Vec<usize> = (1..=c.target_size).collect();
        ensure(depths == want, || {
            format!("chain seed {seed}: depths {depths:?}")
        })?;

        config.p_min = 0.0;
        config.p_max = 0.0;
        let c = sample_component(&star, &config, &mut stream(seed)).map_err(|e| e.to_string())?;
        ensure(
            c.size() == c.target_size
                && c.nodes
                    .iter()
                    .all(|&n| star.parent(n) == Some(NodeRef::Root)),
            || format!("star seed {seed}: {:?}", c.nodes),
        )?;
        let start = NodeRef::Column(seed as usize % 6);
        let w = walk_from(&star, start, 6, 0.0, &mut stream(seed)).map_err(|e| e.to_string())?;
        ensure(
            w.nodes
                .iter()
                .all(|&n| star.parent(n) == Some(NodeRef::Root)),
            || format!("walk seed {seed}"),
        )?;
    }
    Ok(Verdict::Pass(
        "10000 random samples connected and clamped; chain/star exact".into(),
    ))
}

fn c7_split() -> Check {
    let mut rng = stream(7);
    let words: Vec<String> = (0..60).map(|i| format!("w{i}")).collect();
    let mut collapsed_corpora = 0;
    let mut pulled = 0usize;
    for corpus in 0..100 {
        let n = rng.random_range(3..=200);
        let families = rng.random_range(1..=n.min(40));
        let bases: Vec<Vec<String>> = (0..families)
            .map(|_| {
                let k = rng.random_range(2..=6);
                (0..k)
                    .map(|_| words[rng.random_range(0..words.len())].clone())
                    .collect()
            })
            .collect();
        let sigs: Vec<TableSignature> = (0..n)
            .map(|i| {
                let mut tokens: BTreeSet<String> = bases[rng.random_range(0..families)]
                    .iter()
                    .cloned()
                    .collect();
                for _ in 0..rng.random_range(0..=2) {
                    tokens.insert(words[rng.random_range(0..words.len())].clone());
                }
                TableSignature {
                    table_id: format!("t{i:03}"),
                    tokens,
                }
            })
            .collect();
        let config = SplitConfig {
            threshold: 0.5,
            test_seed_fraction: 0.1,
            dev_seed_fraction: 0.1,
            seed: rng.random(),
        };
        let a = propagate_splits(&sigs, &config).map_err(|e| e.to_string())?;
        ensure(a.splits.len() == n, || {
            format!("corpus {corpus}: assignment not total")
        })?;
        let bad = separation_violations(&sigs, &a, 0.5);
        ensure(bad == 0, || format!("corpus {corpus}: {bad} leaking pairs"))?;
        ensure(propagate_splits(&sigs, &config).unwrap() == a, || {
            format!("corpus {corpus}: not deterministic")
        })?;
        let mut shuffled = sigs.clone();
        shuffled.shuffle(&mut rng);
        ensure(propagate_splits(&shuffled, &config).unwrap() == a, || {
            format!("corpus {corpus}: order-dependent")
        })?;
        let stricter = SplitConfig {
            threshold: 0.75,
            ..config
        };
        let b = propagate_splits(&sigs, &stricter).unwrap();
        ensure(b.count(Split::Test) <= a.count(Split::Test), || {
            format!("corpus {corpus}: not monotone")
        })?;
        pulled += a.count(Split::Test) - a.test_seeds.len();
        if [Split::Train, Split::Dev, Split::Test]
            .iter()
            .any(|&s| a.count(s) == 0)
        {
            collapsed_corpora += 1;
        }
    }
    let same: Vec<TableSignature> = ["a", "b", "c"]
        .iter()
        .map(|id| TableSignature::new(*id, "Same title", ["Same", "Header"]))
        .collect();
    let config = SplitConfig {
        threshold: 0.5,
        test_seed_fraction: 0.3,
        dev_seed_fraction: 0.3,
        seed: 1,
    };
    let a = propagate_splits(&same, &config).map_err(|e| e.to_string())?;
    ensure(a.count(Split::Test) == 3, || {
        format!("identical tables split apart: {:?}", a.splits)
    })?;
    Ok(Verdict::Pass(format!(
        "100 corpora, 0 leaking pairs, {pulled} tables pulled into test, {collapsed_corpora} with an empty split"
    )))
}

fn random_text(rng: &mut StreamRng, max: usize) -> String {
    const ALPHABET: &[&str] = &[
        "a", "Z", "0", " ", " ", "|", "\\", "<", ">", "&", "\"", "'", "é", "ß", "中", "🙂", "[",
        "]", "&amp;", "\t", "\n", ";", "#",
    ];
    let len = rng.random_range(0..=max);
    (0..len)
        .map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())])
        .collect()
}

type Spo = (&'static str, &'static str, &'static str);

fn c8_serialization() -> Check {
    let doc = std::fs::read_to_string(fixtures().join("entries.xml")).map_err(|e| e.to_string())?;
    let entries = read_xml(&doc).map_err(|e| e.to_string())?;
    ensure(entries.len() == 2 && entries[1].size() == 6, || {
        format!("parsed {entries:?}")
    })?;
    ensure(write_xml(&entries) == doc, || {
        "reference entries do not round-trip byte-for-byte".into()
    })?;

    let samples: [(&[Spo], &str); 3] = [
        (
            &[("Peru Earthquake", "scale of disaster", "250k homeless"), ("Peru Earthquake", "year", "2007")],
            "<H> Peru Earthquake <R> scale of disaster <T> 250k homeless <H> Peru Earthquake <R> year <T> 2007",
        ),
        (
            &[
                ("[TABLECONTEXT]", "game", "3"),
                ("3", "attendance", "10 637"),
                ("[TABLECONTEXT]", "[TITLE]", "2006 Minnesota Swarm season"),
            ],
            "<H> [TABLECONTEXT] <R> game <T> 3 <H> 3 <R> attendance <T> 10 637 <H> [TABLECONTEXT] <R> [title] <T> 2006 Minnesota Swarm season",
        ),
        (
            &[("Andrew Phelps McCormick", "state", "TX"), ("Andrew Phelps McCormick", "active", "1892-1916")],
            "<H> Andrew Phelps McCormick <R> state <T> TX <H> Andrew Phelps McCormick <R> active <T> 1892-1916",
        ),
    ];
    for (triples, want) in samples {
        let ts = TripleSet::new(
            triples
                .iter()
                .map(|(s, p, o)| Triple::new(*s, *p, *o))
                .collect(),
            Provenance::Unspecified,
        );
        let got = linearize(&ts);
        ensure(got == want, || format!("linearized {got:?}"))?;
    }

    let mut rng = stream(8);
    let provenances = [
        Provenance::Unspecified,
        Provenance::Webnlg,
        Provenance::Wikisql,
        Provenance::E2e,
    ];
    let annotators = [
        Annotator::ExternalDataset,
        Annotator::Internal,
        Annotator::Mturk,
        Annotator::AutoDeclarative,
    ];
    let fuzzed: Vec<CorpusEntry> = (0..1000)
        .map(|i| {
            let triples = (0..rng.random_range(1..=10))
                .map(|_| {
                    Triple::new(
                        random_text(&mut rng, 8),
                        random_text(&mut rng, 6),
                        random_text(&mut rng, 8),
                    )
                })
                .collect();
            let realizations = (0..rng.random_range(1..=3))
                .map(|_| {
                    let mut text = random_text(&mut rng, 30).trim().to_owned();
                    if text.is_empty() {
                        text.push('x');
                    }
                    Realization::new(
                        text,
                        annotators[rng.random_range(0..4)],
                        random_text(&mut rng, 5),
                    )
                })
                .collect();
            CorpusEntry {
                eid: format!("Id{i}"),
                category: random_text(&mut rng, 6),
                tripleset: TripleSet::new(triples, provenances[rng.random_range(0..4)]),
                realizations,
                table_id: rng.random_bool(0.3).then(|| random_text(&mut rng, 5)),
                has_empty_value: rng.random_bool(0.2),
            }
        })
        .collect();
    let written = write_xml(&fuzzed);
    let back = read_xml(&written).map_err(|e| e.to_string())?;
    if back != fuzzed {
        let i = back
            .iter()
            .zip(&fuzzed)
            .position(|(a, b)| a != b)
            .unwrap_or(back.len());
        return Err(format!("fuzzed entry {i} did not round-trip"));
    }
    ensure(write_xml(&back) == written, || {
        "second write differs".into()
    })?;
    Ok(Verdict::Pass(
        "reference XML byte-exact; 3 linearizations exact; 1000 fuzzed entries round-trip".into(),
    ))
}

const AGGREGATE_QUERIES: [&str; 10] = [
    "SELECT MAX(Points) FROM table WHERE Team = 'Chivas'",
    "SELECT MIN(Year) FROM table WHERE Country = 'Greece'",
    "SELECT COUNT(Player) FROM table WHERE Position = 'Guard'",
    "SELECT SUM(Goals) FROM table WHERE Season = '2006'",
    "SELECT AVG(Attendance) FROM table WHERE Venue = 'Olympisch Stadion'",
    "SELECT a.Name FROM t1 a JOIN t2 b ON a.id = b.id",
    "SELECT Name FROM t1 INTERSECT SELECT Name FROM t2",
    "SELECT Name FROM t1 UNION SELECT Name FROM t2",
    "SELECT Team FROM table GROUP BY Team",
    "SELECT Team FROM table WHERE Year = '2004' ORDER BY Points",
];

const PLAIN_QUERIES: [&str; 50] = [
    "SELECT Year FROM table WHERE Country = 'Greece'",
    "SELECT Stadium FROM table WHERE Team = 'Amsterdam Admirals'",
    "SELECT City FROM table WHERE Stadium = 'Olympisch Stadion'",
    "SELECT Capacity FROM table WHERE Stadium = 'Olympisch Stadion'",
    "SELECT Player FROM table WHERE No. = 23",
    "SELECT Position FROM table WHERE Player = 'Terry Jenkins'",
    "SELECT Opponent FROM table WHERE Round = '1st Round' AND Year = 2014",
    "SELECT Result FROM table WHERE Opponent = 'Per Laursen'",
    "SELECT Director FROM table WHERE Film = 'Alien'",
    "SELECT Film FROM table WHERE Director = 'Ridley Scott' AND Year = 1979",
    "select author from table where novel = 'Dune'",
    "SELECT Published FROM table WHERE Author = 'Frank Herbert'",
    "SELECT Mayor FROM table WHERE City = 'Oslo'",
    "SELECT Population FROM table WHERE City = \"Oslo\"",
    "SELECT Span FROM table WHERE Bridge = 'Golden Gate'",
    "SELECT Symbol FROM table WHERE Element = 'Oxygen'",
    "SELECT Element FROM table WHERE Symbol = 'O'",
    "SELECT Discovered FROM table WHERE Element = 'Oxygen'",
    "SELECT Height FROM table WHERE Mountain = 'Everest'",
    "SELECT Length FROM table WHERE River = 'Danube'",
    "SELECT Country FROM table WHERE River = 'Rhine'",
    "SELECT Moons FROM table WHERE Planet = 'Saturn'",
    "SELECT Rings FROM table WHERE Planet = 'Saturn'",
    "SELECT Home team FROM table WHERE Away team = 'América'",
    "SELECT Away team score FROM table WHERE Home team = 'Chivas'",
    "SELECT Venue FROM table WHERE Date = '12 May 2006'",
    "SELECT Crowd FROM table WHERE Venue = 'Princes Park'",
    "SELECT Pick # FROM table WHERE Player = 'Andrew Phelps McCormick'",
    "SELECT `Pick #` FROM table WHERE `College` = 'Texas'",
    "SELECT State FROM table WHERE Name = 'Andrew Phelps McCormick'",
    "SELECT Active FROM table WHERE State = 'TX'",
    "SELECT Nationality FROM table WHERE School/Club Team = 'Duke'",
    "SELECT Height (m) FROM table WHERE Building = 'Taipei 101'",
    "SELECT Floors FROM table WHERE Building = 'Taipei 101' AND City = 'Taipei'",
    "SELECT Winner FROM table WHERE Season = '2005-06'",
    "SELECT Runner-up FROM table WHERE Winner = 'Chivas'",
    "SELECT Score FROM table WHERE Date = 'March 3' AND Opponent = 'Boston'",
    "SELECT Record FROM table WHERE Game = 41",
    "SELECT Location Attendance FROM table WHERE Game = 41",
    "SELECT High points FROM table WHERE Date = 'January 9'",
    "SELECT Party FROM table WHERE Incumbent = 'John Smith'",
    "SELECT First elected FROM table WHERE District = 'Ohio 7'",
    "SELECT Candidates FROM table WHERE District = 'Ohio 7' AND Party = 'Democratic'",
    "SELECT Title FROM table WHERE Episode = 5",
    "SELECT Original air date FROM table WHERE Title = 'Pilot'",
    "SELECT Written by FROM table WHERE Title = 'Pilot'",
    "SELECT Engine FROM table WHERE Chassis = 'Lotus 49'",
    "SELECT Laps FROM table WHERE Driver = 'Jim Clark'",
    "SELECT Team FROM table WHERE Notes = 'MAX effort, ORDER BY coach'",
    "SELECT Team FROM table WHERE Motto = 'Union, Join and Sum'",
];

fn c9_sql() -> Check {
    for q in AGGREGATE_QUERIES {
        for variant in [q.to_owned(), q.to_lowercase()] {
            let parsed = SqlQuery::parse(&variant).map_err(|e| format!("{variant}: {e}"))?;
            ensure(filter_sql(&parsed) == SqlFilter::Reject, || {
                format!("not rejected: {variant}")
            })?;
        }
    }
    for q in PLAIN_QUERIES {
        let parsed = SqlQuery::parse(q).map_err(|e| format!("{q}: {e}"))?;
        ensure(filter_sql(&parsed) == SqlFilter::Accept, || {
            format!("rejected: {q}")
        })?;
        ensure(!parsed.conditions.is_empty(), || {
            format!("no conditions: {q}")
        })?;
    }
    for q in [
        "SELECT a FROM t WHERE b = 'COUNT'",
        "SELECT a FROM t WHERE b = \"group by\"",
        "SELECT a FROM t WHERE b = 'it''s the MIN'",
        "SELECT `SUM` FROM t WHERE b = 'x'",
    ] {
        let parsed = SqlQuery::parse(q).map_err(|e| format!("{q}: {e}"))?;
        ensure(filter_sql(&parsed) == SqlFilter::Accept, || {
            format!("quoted keyword rejected: {q}")
        })?;
    }
    Ok(Verdict::Pass(
        "10 keywords rejected (both cases); 50 plain queries accepted; quoted keywords ignored"
            .into(),
    ))
}

fn c10_golden_pipeline() -> Check {
    let dir = tempfile_dir()?;
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let fx = fixtures().join("pipeline");
    let f = |name: &str| fx.join(name).to_string_lossy().into_owned();
    run_ok(&[
        "ingest-tables",
        "--input",
        &f("tables"),
        "--output",
        &p("tables.jsonl"),
    ])?;
    run_ok(&[
        "validate-ontology",
        "--tables",
        &p("tables.jsonl"),
        "--annotations",
        &f("annotations.jsonl"),
        "--report",
        &p("report.json"),
    ])?;
    run_ok(&[
        "extract",
        "--tables",
        &p("tables.jsonl"),
        "--annotations",
        &f("annotations.jsonl"),
        "--highlights",
        &f("highlights.jsonl"),
        "--output",
        &p("corpus.jsonl"),
    ])?;
    run_ok(&[
        "stats",
        "--input",
        &p("corpus.jsonl"),
        "--json",
        &p("stats.json"),
    ])?;
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("stats.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let golden: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(f("golden_stats.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let got = &stats["all"];
    for key in [
        "pair_count",
        "entry_count",
        "table_count",
        "unique_predicates",
        "unique_triples",
        "vocab_size",
    ] {
        ensure(got[key] == golden[key], || {
            format!("{key}: got {}, golden {}", got[key], golden[key])
        })?;
    }
    for key in ["min", "median", "max"] {
        let (g, w) = (
            got["triples_per_set"][key].as_f64(),
            golden["triples_per_set"][key].as_f64(),
        );
        ensure(g == w, || {
            format!("triples_per_set.{key}: got {g:?}, golden {w:?}")
        })?;
    }
    let pairs = golden["pair_count"].as_f64().unwrap();
    for (key, total) in [
        ("words_per_sr", "words_total"),
        ("sentences_per_sr", "sentences_total"),
    ] {
        let want = golden[total].as_f64().unwrap() / pairs;
        let g = got[key].as_f64().unwrap_or(f64::NAN);
        ensure((g - want).abs() < 1e-9, || {
            format!("{key}: got {g}, golden {want}")
        })?;
    }

    // Stages compose: the exported XML parses back to the same entries.
    run_ok(&[
        "export-xml",
        "--input",
        &p("corpus.jsonl"),
        "--output",
        &p("corpus.xml"),
    ])?;
    let corpus =
        triplekit::formats::read_corpus_jsonl(&std::fs::read_to_string(p("corpus.jsonl")).unwrap())
            .map_err(|e| e.to_string())?;
    let xml =
        read_xml(&std::fs::read_to_string(p("corpus.xml")).unwrap()).map_err(|e| e.to_string())?;
    ensure(xml == corpus, || {
        "XML export does not parse back to the corpus".into()
    })?;

    // Sampling-driven extraction is reproducible.
    for out in ["pending_a.jsonl", "pending_b.jsonl"] {
        run_ok(&[
            "extract",
            "--tables",
            &p("tables.jsonl"),
            "--annotations",
            &f("annotations.jsonl"),
            "--seed",
            "7",
            "--per-row",
            "3",
            "--output",
            &p(out),
        ])?;
    }
    ensure(
        std::fs::read(p("pending_a.jsonl")).unwrap()
            == std::fs::read(p("pending_b.jsonl")).unwrap(),
        || "extract --seed 7 is not byte-identical across runs".into(),
    )?;

    // A cyclic annotation fails validation and the report names the table.
    let defect = fixtures().join("defect");
    run_ok(&[
        "ingest-tables",
        "--input",
        &defect.join("tables").to_string_lossy(),
        "--output",
        &p("defect.jsonl"),
    ])?;
    let out = run_cli(&[
        "validate-ontology",
        "--tables",
        &p("defect.jsonl"),
        "--annotations",
        &defect.join("annotations.jsonl").to_string_lossy(),
    ])?;
    let stderr = String::from_utf8_lossy(&out.stderr);
    ensure(!out.status.success() && stderr.contains("\"loop\""), || {
        format!("defect not reported: {stderr}")
    })?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(Verdict::Pass(
        "10 tables -> golden stats match; XML export lossless; seeded extract reproducible".into(),
    ))
}

fn tempfile_dir() -> Result<PathBuf, String> {
    let dir = std::env::temp_dir().join(format!("triplekit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    Ok(dir)
}

fn release_files() -> Vec<PathBuf> {
    let root = std::env::var_os("TRIPLEKIT_RELEASE_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/release"));
    if root.is_file() {
        return vec![root];
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(&root)
        .map(|d| d.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    files.retain(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "xml")));
    files.sort();
    files
}

fn c11_release() -> Check {
    let files = release_files();
    if files.is_empty() {
        return Ok(Verdict::Skip(
            "no release data (set TRIPLEKIT_RELEASE_DATA)".into(),
        ));
    }
    let mut entries = Vec::new();
    for path in &files {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e == "xml") {
            read_xml(&text)
        } else {
            read_release_json(&text)
        };
        entries.extend(parsed.map_err(|e| format!("{}: {e}", path.display()))?);
    }
    let s = compute_stats(&entries);
    let within = |got: f64, want: f64| (got - want).abs() <= 0.05 * want;
    let msg = format!(
        "{} files, {} pairs: words/SR {:.2} (21.6), sents/SR {:.2} (1.5), vocab {}",
        files.len(),
        s.pair_count,
        s.words_per_sr,
        s.sentences_per_sr,
        s.vocab_size
    );
    if within(s.words_per_sr, 21.6) && within(s.sentences_per_sr, 1.5) {
        Ok(Verdict::Pass(msg))
    } else {
        Err(msg)
    }
}

// ---------------------------------------------------------------- driver

fn main() {
    // Ignore libtest flags such as --nocapture or test-name filters.
    let started = Instant::now();
    let mut failures = 0;
    let mut report = |id: u32, name: &str, limit: u64, elapsed: Duration, result: Check| {
        let over = elapsed > Duration::from_secs(limit);
        let (status, detail) = match result {
            Ok(Verdict::Pass(d)) if !over => ("PASS", d),
            Ok(Verdict::Pass(d)) => ("FAIL", format!("{d}; took longer than {limit} s")),
            Ok(Verdict::Skip(d)) => ("SKIP", d),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {status} {name} [{:.2}s, limit {limit}s]: {detail}",
            elapsed.as_secs_f64()
        );
    };
    let timed = |f: fn() -> Check| {
        let t = Instant::now();
        let r = f();
        (t.elapsed(), r)
    };

    let (d, r) = timed(c1_team_tree);
    report(1, "tree build and triple extraction", 1, d, r);
    let (d, r) = timed(c2_e2e);
    report(2, "E2E meaning representation conversion", 1, d, r);
    let (d, r) = timed(c3_unify);
    report(3, "predicate unification", 5, d, r);
    let t = Instant::now();
    let (r4, r6) = c4_c6_completion();
    let d46 = t.elapsed();
    report(4, "subtree completion oracle", 60, d46, r4);
    let (d, r) = timed(c5_sampler);
    report(5, "component sampler contract", 60, d, r);
    report(6, "triple-count law and discard rule", 10, d46, r6);
    let (d, r) = timed(c7_split);
    report(7, "split separation guarantee", 120, d, r);
    let (d, r) = timed(c8_serialization);
    report(8, "XML and linearization", 30, d, r);
    let (d, r) = timed(c9_sql);
    report(9, "SQL aggregate filter", 5, d, r);
    let (d, r) = timed(c10_golden_pipeline);
    report(10, "golden pipeline", 30, d, r);
    let (d, r) = timed(c11_release);
    report(11, "release corpus statistics", 600, d, r);

    println!(
        "acceptance: {} failed, total {:.2}s",
        failures,
        started.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
