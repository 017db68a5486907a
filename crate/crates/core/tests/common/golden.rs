//! Emitted definitions against hand transcriptions in `tests/golden/`.

use std::path::Path;

use gridpi_core::calculus::{Abstraction, Formal};
use gridpi_core::grid::encode_grid;
use gridpi_core::sim::read_scenario;
use gridpi_core::syntax::parse_program;
use gridpi_core::{congruent, Name, Process, Value};

/// Definition name and transcription file.
pub const CASES: [(&str, &str); 3] = [
    ("User_c2", "user.hopi"),
    ("PrxHdl_v1", "prxhdl.hopi"),
    ("Assign", "assign.hopi"),
];

/// `(formals) body` as a value inside a process, so formals are binders.
fn closed(k: &Name, formals: &[Formal], body: &Process) -> Process {
    Process::output(k.clone(), vec![Value::Proc(Abstraction::new(formals.to_vec(), body.clone()))], Process::nil())
}

pub fn check(def: &str, golden_file: &str) -> Result<(), String> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let s = read_scenario(&root.join("../../fixtures/golden.grid")).map_err(|e| e.to_string())?;
    let enc = encode_grid(&s.config).map_err(|e| e.to_string())?;
    let golden = std::fs::read_to_string(root.join("tests/golden").join(golden_file)).map_err(|e| e.to_string())?;
    // The emitted prelude with this one definition swapped for the
    // transcription.
    let header = format!("def {def}(");
    let prelude = enc.prelude();
    let blocks: Vec<&str> = prelude.split("\n\n").collect();
    if blocks.iter().filter(|b| b.contains(&header)).count() != 1 {
        return Err(format!("{def} is not emitted exactly once"));
    }
    let mut text: String = blocks
        .iter()
        .filter(|b| !b.contains(&header))
        .map(|b| format!("{b}\n\n"))
        .collect();
    text.push_str(&golden);
    // `main` is last in the prelude; move it after the swapped definition.
    let at = text.find("\nmain =").ok_or("no main")?;
    let main: String = text[at..].split("\n\n").next().unwrap().to_string();
    text = text.replacen(&main, "", 1);
    text.push_str(&main);
    text.push('\n');

    let mut supply = enc.supply.clone();
    let prog = parse_program(&text, &mut supply).map_err(|e| e.to_string())?;
    let want = prog.env.get(def).ok_or("transcription lacks the definition")?;
    let got = enc.env.get(def).ok_or("encoder lacks the definition")?;
    if got.formals.len() != want.formals.len() {
        return Err(format!("{def}: {} formals, transcription has {}", got.formals.len(), want.formals.len()));
    }
    let k = supply.name("golden");
    let a = closed(&k, &got.formals, &got.body);
    let b = closed(&k, &want.formals, &want.body);
    if congruent(&a, &b, &mut supply) {
        Ok(())
    } else {
        Err(format!("{def} differs from its transcription"))
    }
}
