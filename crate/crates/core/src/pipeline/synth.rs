//! Random tables shaped like infobox-style Wikipedia tables: a unique name
//! column, a few categorical columns, numeric and date columns.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::table::{RawTable, ShapeBounds};

const SYLLABLES: &[&str] = &[
    "al", "bar", "cor", "dun", "el", "fen", "gar", "hol", "is", "jor", "kel", "lin", "mar", "nor", "os", "pel",
    "quin", "ros", "sel", "tor", "ul", "var", "wen", "yor", "zan",
];
const SUFFIXES: &[&str] = &["ton", "ford", "vale", "wick", "bury", "mouth", "field", "stead"];
const PAGES: &[(&str, &str)] = &[
    ("List of towns in", "Geography"),
    ("Football league of", "Sports"),
    ("Discography of", "Music"),
    ("Elections in", "Politics"),
    ("Film festivals of", "Film"),
    ("Railway stations in", "Transport"),
];
const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October", "November",
    "December",
];

struct ColumnSpec {
    names: &'static [&'static str],
    kind: Kind,
}

#[derive(Clone, Copy)]
enum Kind {
    Category(&'static [&'static str]),
    Count,
    Large,
    FullDate,
    Year,
}

const EXTRA_COLUMNS: &[ColumnSpec] = &[
    ColumnSpec { names: &["Region", "District", "Province"], kind: Kind::Category(&["North", "South", "East", "West"]) },
    ColumnSpec { names: &["Status", "Type", "Class"], kind: Kind::Category(&["Active", "Closed", "Planned"]) },
    ColumnSpec { names: &["Score", "Seats", "Points"], kind: Kind::Count },
    ColumnSpec { names: &["Population", "Attendance", "Revenue"], kind: Kind::Large },
    ColumnSpec { names: &["Date", "Opened", "Released"], kind: Kind::FullDate },
    ColumnSpec { names: &["Founded", "Established", "Built"], kind: Kind::Year },
    ColumnSpec { names: &["Operator", "Owner", "Label"], kind: Kind::Category(&["Crown", "Civic", "Union", "Harbor"]) },
];

fn place_name(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=2);
    let mut s: String = (0..n).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
    s.push_str(SUFFIXES.choose(rng).expect("non-empty"));
    let mut chars = s.chars();
    let first = chars.next().expect("non-empty").to_ascii_uppercase();
    std::iter::once(first).chain(chars).collect()
}

fn distinct<F: FnMut(&mut ChaCha8Rng) -> String>(rng: &mut ChaCha8Rng, n: usize, mut make: F) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = make(rng);
        if seen.insert(v.clone()) {
            out.push(v);
        }
    }
    out
}

fn column(kind: Kind, rows: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    match kind {
        Kind::Category(values) => {
            let k = rng.gen_range(2..=values.len());
            (0..rows).map(|_| values[rng.gen_range(0..k)].to_string()).collect()
        }
        Kind::Count => (0..rows).map(|_| rng.gen_range(0..60u32).to_string()).collect(),
        Kind::Large => distinct(rng, rows, |r| {
            let n: u32 = r.gen_range(1_000..90_000);
            format!("{},{:03}", n / 1000, n % 1000)
        }),
        Kind::FullDate => distinct(rng, rows, |r| {
            format!("{} {} {}", r.gen_range(1..=28), MONTHS[r.gen_range(0..12)], r.gen_range(1950..2021))
        }),
        Kind::Year => (0..rows).map(|_| rng.gen_range(1800..2000u32).to_string()).collect(),
    }
}

/// A table that passes the default shape filter. Pure in `(index, seed)`.
pub fn synthetic_table(index: usize, seed: u64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let bounds = ShapeBounds::default();
    let rows = rng.gen_range(bounds.min_rows..=bounds.max_rows);
    let (page_prefix, category) = PAGES[index % PAGES.len()];
    let region = place_name(&mut rng);

    let mut extras: Vec<&ColumnSpec> = EXTRA_COLUMNS.iter().collect();
    extras.shuffle(&mut rng);
    let n_extra = rng.gen_range(4..=extras.len());
    let mut chosen: Vec<&ColumnSpec> = extras.into_iter().take(n_extra).collect();
    // columns keep a fixed relative order after the random pick
    chosen.sort_by_key(|c| EXTRA_COLUMNS.iter().position(|e| std::ptr::eq(e, *c)));

    let mut header = vec!["Name".to_string()];
    let mut columns = vec![distinct(&mut rng, rows, place_name)];
    for spec in chosen {
        header.push(spec.names.choose(&mut rng).expect("non-empty").to_string());
        columns.push(column(spec.kind, rows, &mut rng));
    }
    let body = (0..rows).map(|r| columns.iter().map(|c| c[r].clone()).collect()).collect();
    RawTable {
        id: format!("synthetic-{seed}-{index}"),
        page_title: format!("{page_prefix} {region}"),
        table_title: format!("{} {}", ["Overview", "Summary", "Results", "Details"][index % 4], index),
        header,
        rows: body,
        category: Some(category.to_string()),
    }
}

/// `n` tables as JSON lines.
pub fn synthetic_dump(n: usize, seed: u64) -> String {
    let mut out = String::new();
    for i in 0..n {
        out.push_str(&serde_json::to_string(&synthetic_table(i, seed)).expect("tables serialize"));
        out.push('\n');
    }
    out
}
