use picheck_core::corpus::{build_model, ModelId};
use picheck_core::equiv::{play_game, GameConfig, RelationKind};
use picheck_core::procs::reset_fresh_names;
use std::time::Instant;

fn main() {
    for (style, depth, cap) in [("bac-get", 10u32, 3u32), ("bac-ch", 9, 3)] {
        reset_fresh_names();
        let sys = build_model(ModelId::parse(&format!("{style}-system")).unwrap()).unwrap();
        let spec = build_model(ModelId::parse(&format!("{style}-spec")).unwrap()).unwrap();
        let cfg = GameConfig { relation: RelationKind::ISim, depth, recipe_depth: 1, bang_cap: cap };
        let t0 = Instant::now();
        match play_game(&sys, &spec, &cfg) {
            Ok(v) => println!("{style}: dist={} in {:?}", v.is_distinguished(), t0.elapsed()),
            Err(e) => println!("{style}: ERROR {e}"),
        }
    }
}
