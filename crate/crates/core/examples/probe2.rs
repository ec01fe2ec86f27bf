use picheck_core::corpus::{build_model, ModelId};
use picheck_core::equiv::{play_game, GameConfig, GameVerdict, RelationKind};
use picheck_core::procs::{parse_process, reset_fresh_names};
use std::time::Instant;

fn run(name: &str, l: &picheck_core::ExtendedProcess, r: &picheck_core::ExtendedProcess, rel: RelationKind, depth: u32, expect_dist: bool) {
    reset_fresh_names();
    let cfg = GameConfig { relation: rel, depth, recipe_depth: 1, bang_cap: 4 };
    let t0 = Instant::now();
    match play_game(l, r, &cfg) {
        Ok(v) => {
            let dist = v.is_distinguished();
            let extra = match &v {
                GameVerdict::RelatedUpToBound(s) => format!("{} pairs", s.pairs_explored),
                GameVerdict::Distinguished(s) => format!("{} moves", s.moves.len()),
            };
            println!("{name:35} {rel:8}: dist={dist} expect={expect_dist} {} ({extra}) in {:?}",
                if dist == expect_dist { "OK" } else { "** MISMATCH **" }, t0.elapsed());
        }
        Err(e) => println!("{name:35} {rel:?}: ERROR {e}"),
    }
}

fn main() {
    // Example 8 pair: sequential-then-parallel vs parallel variant.
    let l8 = parse_process("new x,y,z.(out(a,x).(out(b,y) | out(c,z)))").unwrap();
    let r8 = parse_process("new x,y,z.(out(a,x).out(b,y) | out(c,z))").unwrap();
    run("ex8 finite", &l8, &r8, RelationKind::HpSim, 6, true);
    run("ex8 finite", &l8, &r8, RelationKind::ISim, 6, false);

    // Example 8 infinite pair.
    let l8i = parse_process("!(new x.out(a,x).new y.out(a,y))").unwrap();
    let r8i = parse_process("!(new x.out(a,x))").unwrap();
    run("ex8 infinite", &l8i, &r8i, RelationKind::HpSim, 6, true);
    run("ex8 infinite", &l8i, &r8i, RelationKind::ISim, 6, false);

    // The sequential vs parallel self-communication pair.
    let seq = parse_process("out(a,a).out(a,a)").unwrap();
    let par = parse_process("out(a,a) | out(a,a)").unwrap();
    run("seq vs par", &seq, &par, RelationKind::HpSim, 6, true);
    run("seq vs par", &seq, &par, RelationKind::IBisim, 6, false);

    // Example 9 pair (preserving independence).
    let l9 = parse_process(
        "new cc,dd.( (out(dd,dd) | new n.out(a,n).in(dd,z).in(n,x)) | (out(cc,cc) | in(cc,y)) )",
    ).unwrap();
    let r9 = parse_process(
        "new ee,ff,n.( (out(ff,ff) | out(a,n).in(ff,z)) | (out(ee,ee) | in(ee,y).in(n,x)) )",
    ).unwrap();
    run("ex9", &l9, &r9, RelationKind::HpSim, 8, true);
    run("ex9", &l9, &r9, RelationKind::ISim, 8, false);

    // Criterion 3: the bounded two-session game.
    let sys2 = build_model(ModelId::parse("bac-two-system").unwrap()).unwrap();
    let spec2 = build_model(ModelId::parse("bac-two-spec").unwrap()).unwrap();
    run("bac-two", &sys2, &spec2, RelationKind::ISim, 14, true);
}
