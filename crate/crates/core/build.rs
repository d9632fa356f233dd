use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

#[derive(Deserialize)]
struct Table {
    case: Vec<Row>,
}

#[derive(Deserialize)]
struct Row {
    id: String,
    m: u32,
    blocks: Vec<[u32; 3]>,
    k: String,
    p: String,
    g: String,
    group: String,
    vacuum: String,
    #[serde(default)]
    note: Option<String>,
}

fn main() {
    let src = "data/cases.toml";
    println!("cargo:rerun-if-changed={src}");
    let text = fs::read_to_string(src).expect("read case table");
    let table: Table = toml::from_str(&text).expect("parse case table");

    let mut out = String::from("pub(crate) static EXCEPTIONAL: &[RawCase] = &[\n");
    for r in &table.case {
        let blocks: Vec<String> = r
            .blocks
            .iter()
            .map(|[q, d, w]| format!("({q}, {d}, {w})"))
            .collect();
        writeln!(
            out,
            "    RawCase {{ id: {:?}, m: {}, blocks: &[{}], k: {:?}, p: {:?}, g: {:?}, group: {:?}, vacuum: {:?}, note: {:?} }},",
            r.id,
            r.m,
            blocks.join(", "),
            r.k,
            r.p,
            r.g,
            r.group,
            r.vacuum,
            r.note.as_deref().unwrap_or(""),
        )
        .unwrap();
    }
    out.push_str("];\n");

    let dest = Path::new(&env::var("OUT_DIR").unwrap()).join("cases.rs");
    fs::write(dest, out).expect("write generated registry");
}
