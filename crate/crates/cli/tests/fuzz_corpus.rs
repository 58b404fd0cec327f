use std::fs;
use std::path::Path;

use friction_lab::fuzz_entry::TARGETS;

fn corpus_dir(target: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target)
}

#[test]
fn every_target_has_seeds() {
    for (name, _) in TARGETS {
        let n = fs::read_dir(corpus_dir(name)).map(|d| d.count()).unwrap_or(0);
        assert!(n > 0, "no corpus seeds for {name}");
    }
}

#[test]
fn corpus_replays_without_panic() {
    for (name, entry) in TARGETS {
        for file in fs::read_dir(corpus_dir(name)).unwrap() {
            let path = file.unwrap().path();
            entry(&fs::read(&path).unwrap());
        }
    }
}

#[test]
fn mangled_seeds_do_not_panic() {
    for (name, entry) in TARGETS {
        for file in fs::read_dir(corpus_dir(name)).unwrap() {
            let bytes = fs::read(file.unwrap().path()).unwrap();
            for cut in 0..bytes.len() {
                entry(&bytes[..cut]);
            }
            for i in 0..bytes.len() {
                let mut flipped = bytes.clone();
                flipped[i] ^= 0x20;
                entry(&flipped);
            }
        }
    }
}
