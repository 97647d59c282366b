//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. All checks are exact rational comparisons; the
//! independent oracles below (Stern–Brocot queue, brute-force tree checks,
//! per-round strategy re-evaluation) share no code with the engine paths they
//! check.

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cantor_core::code::{anchored_value, flip_witness, membership_probe, Code, Probe, Tail};
use cantor_core::enumeration::{RatEnumeration, DEFAULT_LEVEL_CAP};
use cantor_core::extraction::{extract, ExtractedTree};
use cantor_core::game::{limit_bracket, run, GameConfig, History, Oracle, Side};
use cantor_core::interval::Interval;
use cantor_core::rat::{rat, Rat};
use cantor_core::strategy::{counterplay, make_oracle, midpoint_sampler, rebase_strategy_b, StrategyKind};
use cantor_core::target::{
    cond_point, condensation_partition_probe, t15_probe, Determinacy, Direction, PartitionWitness, PerfectWitness,
    Point, SetExpr, Verdict,
};
use cantor_core::tree::{avoid_open_cover_tree, enumeration_cover, CantorTree, Path};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const A_ORACLES: [&str; 4] = ["midpoint_A", "seeded_random(A,1)", "seeded_random(A,42)", "tree_chaser_A"];
const B_ORACLES: [&str; 4] = ["midpoint_B", "squeeze_B", "countable_killer_B", "seeded_random(B,42)"];
const DEPTH: usize = 6;

type Artifacts = BTreeMap<String, Vec<u8>>;
type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn unit() -> GameConfig {
    GameConfig::unit()
}

fn oracle(desc: &str, side: Side) -> Oracle {
    make_oracle(desc, Some(side), &unit()).unwrap()
}

fn file_stem(desc: &str) -> String {
    desc.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn pretty(v: &impl serde::Serialize) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).unwrap();
    b.push(b'\n');
    b
}

/// `ℚ ∩ [0, 1]` as `0, 1`, then Stern–Brocot mediants level by level, built
/// with a queue of neighbour pairs.
fn sb_oracle(n: usize) -> Vec<Rat> {
    let mut out = vec![(0u64, 1u64), (1, 1)];
    let mut level = vec![((0u64, 1u64), (1u64, 1u64))];
    while out.len() < n {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (l, r) in level {
            let m = (l.0 + r.0, l.1 + r.1);
            out.push(m);
            next.push((l, m));
            next.push((m, r));
        }
        level = next;
    }
    out.truncate(n);
    out.into_iter().map(|(p, q)| Rat::new(p, q)).collect()
}

/// Brute-force structural check of a materialized tree to `depth`: node
/// count, positive width below `e(n)`, nesting in the parent, and pairwise
/// disjointness of every two nodes of one level.
fn brute_check(nodes: &BTreeMap<Path, Interval>, depth: usize, e: impl Fn(usize) -> Rat) -> Result<(), String> {
    let expected = (1usize << (depth + 1)) - 2;
    let count = nodes.keys().filter(|p| (1..=depth).contains(&p.len())).count();
    ensure(count == expected, || format!("{count} nodes, expected {expected}"))?;
    for n in 1..=depth {
        let level: Vec<(&Path, &Interval)> = nodes.iter().filter(|(p, _)| p.len() == n).collect();
        for (p, i) in &level {
            let w = &i.hi - &i.lo;
            ensure(w > Rat::zero() && w < e(n), || format!("node {p}: width {w} not in (0, {})", e(n)))?;
            let parent = &nodes[&p.parent().unwrap()];
            ensure(parent.lo <= i.lo && i.hi <= parent.hi, || format!("node {p} leaves its parent"))?;
        }
        for (k, (p, i)) in level.iter().enumerate() {
            for (q, j) in &level[k + 1..] {
                ensure(i.hi < j.lo || j.hi < i.lo, || format!("nodes {p} and {q} meet"))?;
            }
        }
    }
    Ok(())
}

fn extraction_suite(descs: &[&str], side: Side, art: &mut Artifacts, trees: &mut Vec<(String, Oracle, ExtractedTree)>) -> Check {
    let start = Instant::now();
    let e = RatEnumeration::unit();
    let mut notes = Vec::new();
    for d in descs {
        let g = oracle(d, side);
        let t = extract(g.as_ref(), &unit(), DEPTH, &e, DEFAULT_LEVEL_CAP).map_err(|err| format!("{d}: {err}"))?;
        let report = t.tree.validate(DEPTH);
        ensure(report.is_clean(), || format!("{d}: {:?}", report.violations))?;
        ensure(report.nodes == 126, || format!("{d}: validated {} nodes", report.nodes))?;
        let nodes = t.tree.materialize(DEPTH).map_err(|err| err.to_string())?;
        // widths below (b0 - a0) / 2^n
        brute_check(&nodes, DEPTH, |n| Rat::pow2_inv(n as u32)).map_err(|m| format!("{d}: {m}"))?;
        let audit = t.audit(g.as_ref(), &e, DEFAULT_LEVEL_CAP);
        ensure(audit.is_empty(), || format!("{d}: audit {audit:?}"))?;
        art.insert(format!("extract_{}.json", file_stem(&g.descriptor())), pretty(&t.to_file().unwrap()));
        notes.push(g.descriptor());
        trees.push((d.to_string(), g, t));
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("took {took:?}, limit 10 s"))?;
    Ok(format!("{} x 126 nodes, 0 violations, widths < 1/2^n, {:.2?} (< 10 s) [{}]", descs.len(), took, notes.join(", ")))
}

/// Each move of the side that `g` plays is `g` of the play before it.
fn reevaluate(h: &History, g: &dyn cantor_core::Strategy) -> Result<(), String> {
    for (i, (a, b)) in h.rounds().iter().enumerate() {
        let (asked, got) = match g.side() {
            Side::A => (h.prefix(i), a),
            Side::B => (h.prefix_with_a(i), b),
        };
        let want = g.choose(&asked);
        ensure(&want == got, || format!("round {}: strategy gives {want}, play has {got}", i + 1))?;
    }
    Ok(())
}

fn criterion_3(trees: &[(String, Oracle, ExtractedTree)]) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut count = 0;
    for (d, g, t) in trees {
        for _ in 0..20 {
            let code = Path::from_bits((0..DEPTH).map(|_| rng.random::<bool>()));
            let r = t.replay(&code, g.as_ref()).map_err(|e| format!("{d} {code}: {e}"))?;
            ensure(r.consistency.is_consistent(), || format!("{d} {code}: {:?}", r.consistency))?;
            reevaluate(&r.history, g.as_ref()).map_err(|m| format!("{d} {code}: {m}"))?;
            let b = limit_bracket(&r.history).map_err(|e| e.to_string())?;
            let cell = t.tree.node(&code.prefix(DEPTH - 1)).unwrap();
            ensure(cell.lo <= b.lo && b.hi <= cell.hi, || format!("{d} {code}: bracket [{}, {}] outside {cell}", b.lo, b.hi))?;
            count += 1;
        }
    }
    Ok(format!("{count}/{count} replays consistent, brackets inside the depth-5 cell"))
}

fn random_code(rng: &mut ChaCha8Rng, tree: &Arc<CantorTree>) -> Code {
    let len = rng.random_range(0..=8);
    let prefix = Path::from_bits((0..len).map(|_| rng.random::<bool>()));
    let tail = match rng.random_range(0..3) {
        0 => Tail::AllZeros,
        1 => Tail::AllOnes,
        _ => {
            let w = rng.random_range(1..=3);
            Tail::Periodic(Path::from_bits((0..w).map(|_| rng.random::<bool>())))
        }
    };
    Code::new(Arc::clone(tree), prefix, tail).unwrap()
}

fn criterion_4() -> Check {
    let host = Interval::new(rat(0, 1), rat(1, 1));
    let cover = enumeration_cover(&RatEnumeration::unit(), 10);
    let trees: Vec<(&str, Arc<CantorTree>)> = vec![
        ("middle_thirds[0,1]", Arc::new(CantorTree::middle_thirds(host.clone()).unwrap())),
        ("middle_thirds[1/8,7/8]", Arc::new(CantorTree::middle_thirds(Interval::new(rat(1, 8), rat(7, 8))).unwrap())),
        ("avoid_cover", Arc::new(avoid_open_cover_tree(&cover, host, 5).unwrap())),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut count = 0;
    for (name, tree) in &trees {
        for _ in 0..50 {
            let x = random_code(&mut rng, tree);
            let n = rng.random_range(1..=6);
            let w = flip_witness(&x, n).map_err(|e| format!("{name}: {e}"))?;
            ensure(w.verify(), || format!("{name} {x} N={n}: witness does not verify"))?;
            for i in 0..24 {
                ensure((x.bit(i) == w.code.bit(i)) == (i != n), || format!("{name} {x} N={n}: bit {i}"))?;
            }
            // recompute the cells from the tree itself
            let shared = tree.node(&x.path(n).unwrap()).unwrap();
            let xc = tree.node(&x.path(n + 1).unwrap()).unwrap();
            let yc = tree.node(&w.code.path(n + 1).unwrap()).unwrap();
            ensure(xc.hi < yc.lo || yc.hi < xc.lo, || format!("{name} {x} N={n}: cells meet"))?;
            for c in [&xc, &yc] {
                ensure(shared.lo <= c.lo && c.hi <= shared.hi, || format!("{name} {x} N={n}: cell outside shared"))?;
            }
            let e = tree.e(n);
            ensure(&shared.hi - &shared.lo < e, || format!("{name} {x} N={n}: shared width not below e_N"))?;
            count += 1;
        }
    }
    Ok(format!("{count}/{count} flips certified (disjoint depth-(N+1) cells, shared depth-N cell narrower than e_N)"))
}

fn criterion_5() -> Check {
    let q = sb_oracle(33);
    let killer = oracle("countable_killer_B", Side::B);
    for d in A_ORACLES {
        let h = run(&unit(), oracle(d, Side::A).as_ref(), killer.as_ref(), 32).map_err(|e| format!("{d}: {e}"))?;
        let (a, b) = h.rounds().last().unwrap();
        for (j, x) in q.iter().enumerate() {
            ensure(!(a < x && x < b), || format!("{d}: q_{j} = {x} inside ({a}, {b})"))?;
        }
    }
    Ok("4 A-oracles x 32 rounds: q_0..q_32 all outside (a_32, b_32)".into())
}

fn criterion_6() -> Check {
    let (lo, hi) = StrategyKind::default_chaser_range(&unit());
    let target = CantorTree::middle_thirds(Interval::new(lo, hi)).unwrap();
    let chaser = oracle("tree_chaser_A", Side::A);
    let mut moves = 0;
    for d in B_ORACLES {
        let h = run(&unit(), chaser.as_ref(), oracle(d, Side::B).as_ref(), 32).map_err(|e| format!("IllegalMove vs {d}: {e}"))?;
        let mut prev = rat(0, 1);
        for (n, (a, _)) in h.rounds().iter().enumerate() {
            ensure(a > &prev, || format!("{d}: a_{} = {a} does not increase", n + 1))?;
            prev = a.clone();
            match membership_probe(&target, a, 4096).map_err(|e| e.to_string())? {
                Probe::In { prefix } => {
                    // anchored: left end of the node and of its 0-child
                    let node = target.node(&prefix).unwrap();
                    let zero = target.node(&prefix.child(false)).unwrap();
                    ensure(&node.lo == a && &zero.lo == a, || format!("{d}: a_{} = {a} not anchored at {prefix}", n + 1))?;
                }
                other => return Err(format!("{d}: a_{} = {a} has no In certificate: {other:?}", n + 1)),
            }
            moves += 1;
        }
    }
    Ok(format!("{moves} A moves vs 4 B-oracles, all anchored In, strictly increasing, 0 IllegalMove"))
}

fn criterion_7(art: &mut Artifacts) -> Check {
    let g = oracle("midpoint_B", Side::B);
    let s = rat(1, 3);
    let t = counterplay(Arc::clone(&g), &unit(), s, &midpoint_sampler, 20).map_err(|e| e.to_string())?;
    art.insert("counterplay_midpoint_B_1_3.json".into(), pretty(&t));
    let two20 = Rat::from_int(1 << 20);
    let want = (&two20 - Rat::one()) / (Rat::from_int(3) * &two20);
    let a20 = t.committed.rounds()[19].0.clone();
    let consistent = t.consistent && cantor_core::check_consistency(&t.committed, g.as_ref(), Side::B).is_consistent();
    let summary = format!(
        "restarts = {} (first at round {}), a_20 = {a20}, required 0 restarts and a_20 = {want}, consistent = {consistent}",
        t.restarts.len(),
        t.restarts.first().map_or("-".to_string(), |r| r.round.to_string()),
    );
    ensure(t.restarts.is_empty() && a20 == want && consistent, || summary.clone())?;
    Ok(summary)
}

fn random_sub_history(rng: &mut ChaCha8Rng, config: GameConfig, g_hat: &dyn cantor_core::Strategy, rounds: usize) -> History {
    let mut h = History::new(config);
    let pick = |h: &History, rng: &mut ChaCha8Rng| {
        let (lo, hi) = h.legal_bounds();
        let q: i64 = rng.random_range(2..=9);
        let p: i64 = rng.random_range(1..q);
        &lo + (&hi - &lo) * Rat::new(p, q)
    };
    for _ in 0..rounds {
        let a = pick(&h, rng);
        h.play(Side::A, a).unwrap();
        let b = g_hat.choose(&h);
        h.play(Side::B, b).unwrap();
    }
    let a = pick(&h, rng);
    h.play(Side::A, a).unwrap();
    h
}

fn criterion_8(art: &mut Artifacts) -> Check {
    let s = rat(1, 3);
    let g = oracle("dodger_B(1/3)", Side::B);
    let t = counterplay(Arc::clone(&g), &unit(), s, &midpoint_sampler, 20).map_err(|e| e.to_string())?;
    art.insert("counterplay_dodger_B_1_3.json".into(), pretty(&t));
    ensure(!t.restarts.is_empty(), || "no restart".into())?;
    let n = t.restarts[0].round;
    let committed = t.committed.prefix(n);
    let g_hat = rebase_strategy_b(Arc::clone(&g), committed.clone()).map_err(|e| e.to_string())?;
    let sub = GameConfig::new(committed.last_a().clone(), committed.last_b().clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..10 {
        let h = random_sub_history(&mut rng, sub.clone(), g_hat.as_ref(), k);
        let first = g_hat.choose(&h);
        let again = g_hat.choose(&h);
        let direct = g.choose(&committed.concat(&h).unwrap());
        ensure(first == again && first == direct, || format!("sub-history {k}: rebased {first}, original {direct}"))?;
    }
    let consistent = cantor_core::check_consistency(&t.committed, g.as_ref(), Side::B).is_consistent();
    ensure(t.consistent && consistent, || "final play inconsistent with the original strategy".into())?;
    reevaluate(&t.committed, g.as_ref())?;
    Ok(format!("{} restarts (first at round {n}); rebase identity exact on 10 sub-histories; final play consistent", t.restarts.len()))
}

fn criterion_9(art: &mut Artifacts) -> Check {
    let host = Interval::new(rat(0, 1), rat(1, 1));
    let thirds = SetExpr::tree(CantorTree::middle_thirds(host.clone()).unwrap(), DEPTH);
    let v = thirds.classify();
    art.insert("classify_middle_thirds.json".into(), pretty(&v.to_json().unwrap()));
    match &v {
        Determinacy::AWins(PerfectWitness::Tree { tree, report }) => {
            ensure(report.is_clean() && tree.validate(8).is_clean(), || "witness fails validation".into())?;
            brute_check(&tree.materialize(DEPTH).unwrap(), DEPTH, |n| tree.e(n))?;
        }
        other => return Err(format!("middle thirds: {}", other.label())),
    }

    let q0 = SetExpr::rationals(rat(0, 1), rat(1, 1)).unwrap();
    let v = q0.classify();
    art.insert("classify_q0.json".into(), pretty(&v.to_json().unwrap()));
    let Determinacy::BWins(w) = &v else { return Err(format!("rationals: {}", v.label())) };
    let listed: HashSet<Rat> = w.iter().take(1000).collect();
    for q in 1..=8i64 {
        for p in 0..=q {
            ensure(listed.contains(&rat(p, q)), || format!("{p}/{q} missing from the witness"))?;
        }
    }

    let cover = enumeration_cover(&RatEnumeration::unit(), 10);
    let q = sb_oracle(10);
    for (n, u) in cover.iter().enumerate() {
        let r = Rat::pow2_inv(n as u32 + 3);
        ensure(u.lo == &q[n] - &r && u.hi == &q[n] + &r, || format!("U_{} is not q_{} +- 1/2^{}", n + 1, n, n + 3))?;
    }
    let s = SetExpr::CoverComplement { host, cover: cover.clone() };
    let v = s.classify();
    art.insert("classify_cover_complement.json".into(), pretty(&v.to_json().unwrap()));
    let Determinacy::AWins(PerfectWitness::Tree { tree, report }) = &v else { return Err(format!("cover complement: {}", v.label())) };
    ensure(report.is_clean() && report.depth == 5, || "cover witness fails validation".into())?;
    let nodes = tree.materialize(5).unwrap();
    brute_check(&nodes, 5, |n| tree.e(n))?;
    for (p, i) in nodes.iter().filter(|(p, _)| !p.is_empty()) {
        for (k, u) in cover.iter().enumerate() {
            ensure(i.hi <= u.lo || i.lo >= u.hi, || format!("node {p} meets U_{}", k + 1))?;
        }
    }
    Ok("middle thirds AWins (clean to depth 8); rationals BWins (all p/q, q <= 8, within 1000); cover complement AWins, 62 nodes clear of U_1..U_10".into())
}

/// `prefix 1 1 1 ...` on a sibling-ordered tree: no node of the same depth
/// starts inside `(x, hi]` of its own cell, and its all-ones descendants stay
/// rightmost among the cell's descendants.
fn rightmost_certificate(tree: &CantorTree, prefix: &Path, extra: usize) -> Result<(), String> {
    let cell = tree.node(prefix).unwrap();
    for other in Path::all_of_len(prefix.len()).filter(|o| o != prefix) {
        let j = tree.node(&other).unwrap();
        ensure(j.hi < cell.lo || j.lo > cell.hi, || format!("{other} meets {prefix}"))?;
    }
    for m in 1..=extra {
        let ones = prefix.concat(&Path::from_bits(std::iter::repeat_n(true, m)));
        let r = tree.node(&ones).unwrap();
        for w in Path::all_of_len(m).filter(|w| w.bits().iter().any(|b| !b)) {
            let j = tree.node(&prefix.concat(&w)).unwrap();
            ensure(j.hi < r.lo, || format!("{} is not left of {ones}", prefix.concat(&w)))?;
        }
    }
    Ok(())
}

/// Finds the node of `tree` equal to `target` by descent.
fn locate(tree: &CantorTree, target: &Interval) -> Option<Path> {
    let mut p = Path::root();
    for _ in 0..64 {
        let here = tree.node(&p).ok()?;
        if &here == target {
            return Some(p);
        }
        let (a, b) = tree.children(&p).ok()?;
        p = if a.includes(target) { p.child(false) } else if b.includes(target) { p.child(true) } else { return None };
    }
    None
}

fn criterion_10() -> Check {
    let q0 = SetExpr::rationals(rat(0, 1), rat(1, 1)).unwrap();
    for (k, x) in sb_oracle(100).into_iter().enumerate() {
        for dir in [Direction::Plus, Direction::Minus] {
            let v = cond_point(&q0, &Point::Rat(x.clone()), dir, 12);
            ensure(v.verdict == Verdict::No, || format!("q_{k} = {x} {dir:?}: {:?}", v.verdict))?;
        }
    }

    let iv = SetExpr::interval(rat(3, 4), rat(1, 1)).unwrap();
    match condensation_partition_probe(&iv).map_err(|e| e.to_string())? {
        PartitionWitness::Points(ps) => {
            ensure(ps == vec![rat(1, 1)], || format!("interval witness {ps:?}"))?;
            ensure(cond_point(&iv, &Point::Rat(rat(1, 1)), Direction::Plus, 8).verdict == Verdict::No, || "1 is plus-Yes".into())?;
        }
        other => return Err(format!("interval witness {other:?}")),
    }
    let thirds_tree = Arc::new(CantorTree::middle_thirds(Interval::new(rat(0, 1), rat(1, 1))).unwrap());
    let thirds = SetExpr::Tree { tree: Arc::clone(&thirds_tree), depth: DEPTH };
    let w = condensation_partition_probe(&thirds).map_err(|e| e.to_string())?;
    for k in 0..50 {
        let c = w.code_at(k).unwrap();
        ensure(c.tail() == &Tail::AllOnes, || format!("witness code {k} tail"))?;
        ensure(c.prefix().is_empty() || c.prefix().last() == Some(false), || format!("witness code {k} prefix {}", c.prefix()))?;
        rightmost_certificate(&thirds_tree, c.prefix(), 4)?;
        let v = cond_point(&thirds, &Point::Code(c.clone()), Direction::Plus, 8);
        ensure(v.verdict == Verdict::No, || format!("witness code {c} is plus-{:?}", v.verdict))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut pairs = 0;
    for i in 0..5i64 {
        let x = rat(3, 4) + rat(i, 24);
        let y = &x + Rat::new(1, rng.random_range(8..=64i64));
        match t15_probe(&iv, &Point::Rat(x.clone()), &y, 64).map_err(|e| format!("({x}, {y}): {e}"))? {
            PerfectWitness::Interval(j) => {
                ensure(x < j.lo && j.lo < j.hi && j.hi < y && rat(3, 4) <= j.lo && j.hi <= rat(1, 1), || format!("({x}, {y}): {j}"))?;
            }
            other => return Err(format!("({x}, {y}): {other:?}")),
        }
        pairs += 1;
    }
    for _ in 0..5 {
        let len = rng.random_range(1..=5);
        let prefix = Path::from_bits((0..len).map(|_| rng.random::<bool>()));
        let code = Code::zeros(Arc::clone(&thirds_tree), prefix.clone());
        let x = anchored_value(&code).unwrap();
        let width = thirds_tree.node(&prefix).unwrap().width();
        let y = &x + &width / Rat::from_int(rng.random_range(2..=40i64));
        let wit = t15_probe(&thirds, &Point::Code(code), &y, 64).map_err(|e| format!("({x}, {y}): {e}"))?;
        let PerfectWitness::Tree { tree, report } = &wit else { return Err(format!("({x}, {y}): {wit:?}")) };
        ensure(report.is_clean(), || format!("({x}, {y}): subtree fails validation"))?;
        brute_check(&tree.materialize(4).unwrap(), 4, |n| tree.e(n))?;
        let root = tree.root().clone();
        ensure(x < root.lo && root.hi < y, || format!("({x}, {y}): root {root} not inside"))?;
        let at = locate(&thirds_tree, &root).ok_or_else(|| format!("({x}, {y}): root {root} is not a node"))?;
        for w in (1..=3).flat_map(Path::all_of_len) {
            ensure(tree.node(&w).unwrap() == thirds_tree.node(&at.concat(&w)).unwrap(), || format!("subtree node {w} differs"))?;
        }
        pairs += 1;
    }
    Ok(format!("100 rationals cond-No both sides; 1 + 50 partition points not plus-Yes; {pairs} perfect witnesses inside (x, y)"))
}

fn criterion_11() -> Check {
    let e = RatEnumeration::unit();
    let got: Vec<Rat> = (0..1000).map(|k| e.at(k)).collect();
    let distinct: HashSet<&Rat> = got.iter().collect();
    ensure(distinct.len() == 1000, || format!("{} distinct of 1000", distinct.len()))?;
    let want = sb_oracle(1000);
    if let Some(k) = (0..1000).find(|&k| got[k] != want[k]) {
        return Err(format!("index {k}: {} vs queue oracle {}", got[k], want[k]));
    }
    let mut needed = 0;
    for q in 1..=8i64 {
        for p in 0..=q {
            if num_integer::gcd(p, q) == 1 {
                needed += 1;
                ensure(distinct.contains(&rat(p, q)), || format!("{p}/{q} not among the first 1000"))?;
            }
        }
    }
    Ok(format!("1000 distinct, equal to the queue oracle; all {needed} reduced p/q with q <= 8 present"))
}

struct Line {
    n: usize,
    title: &'static str,
    result: Check,
}

fn guarded(f: impl FnOnce() -> Check) -> Check {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(format!(
            "panicked: {}",
            p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        )),
    }
}

fn suite(art: &mut Artifacts) -> Vec<Line> {
    let mut lines = Vec::new();
    let mut a_trees = Vec::new();
    let mut b_trees = Vec::new();
    lines.push(Line { n: 1, title: "extraction soundness, A-oracles", result: guarded(|| extraction_suite(&A_ORACLES, Side::A, art, &mut a_trees)) });
    lines.push(Line { n: 2, title: "extraction soundness, B-oracles", result: guarded(|| extraction_suite(&B_ORACLES, Side::B, art, &mut b_trees)) });
    let all: Vec<_> = a_trees.into_iter().chain(b_trees).collect();
    lines.push(Line {
        n: 3,
        title: "replay consistency",
        result: guarded(|| if all.len() == 8 { criterion_3(&all) } else { Err(format!("only {} extractions available", all.len())) }),
    });
    lines.push(Line { n: 4, title: "flip construction", result: guarded(criterion_4) });
    lines.push(Line { n: 5, title: "countable-target exclusion", result: guarded(criterion_5) });
    lines.push(Line { n: 6, title: "chaser membership", result: guarded(criterion_6) });
    lines.push(Line { n: 7, title: "counter-play vs midpoint_B, s = 1/3", result: guarded(|| criterion_7(art)) });
    lines.push(Line { n: 8, title: "counter-play vs dodger", result: guarded(|| criterion_8(art)) });
    lines.push(Line { n: 9, title: "classifier", result: guarded(|| criterion_9(art)) });
    lines.push(Line { n: 10, title: "condensation calculus", result: guarded(criterion_10) });
    lines.push(Line { n: 11, title: "enumeration", result: guarded(criterion_11) });
    lines
}

fn write_all(dir: &PathBuf, art: &Artifacts) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in art {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn determinism(first: &Artifacts, took: Duration) -> Check {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let (d1, d2) = (root.join("run1"), root.join("run2"));
    let _ = std::fs::remove_dir_all(&root);
    write_all(&d1, first).map_err(|e| e.to_string())?;
    let mut second = Artifacts::new();
    let _ = suite(&mut second);
    write_all(&d2, &second).map_err(|e| e.to_string())?;
    ensure(first.keys().eq(second.keys()), || "runs wrote different artifact sets".into())?;
    for name in first.keys() {
        let a = std::fs::read(d1.join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(d2.join(name)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{name} differs between runs"))?;
    }
    ensure(took < Duration::from_secs(60), || format!("suite took {took:?}, limit 60 s"))?;
    Ok(format!("{} artifacts byte-identical across two runs; suite {:.2?} (< 60 s)", first.len(), took))
}

fn main() {
    let start = Instant::now();
    let mut art = Artifacts::new();
    let mut lines = suite(&mut art);
    let took = start.elapsed();
    lines.push(Line { n: 12, title: "determinism and runtime", result: guarded(|| determinism(&art, took)) });
    let mut failed = 0;
    for l in &lines {
        let (tag, detail) = match &l.result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}  {}: {detail}", l.n, l.title);
    }
    println!("{} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
