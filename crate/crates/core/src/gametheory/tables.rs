//! Symbolic payoff tables: the Total column of each game's payoff analysis as
//! a linear formula in the monetary variables, per terminal node and player.

use serde::Serialize;

use super::game::GameError;
use super::GameId;
use crate::ledger::Params;

/// A parsed linear formula `Σ coeff · var + constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub source: String,
    terms: Vec<(i64, Var)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    One,
    W,
    C,
    Ch,
    D,
    T,
    B,
    Z,
}

impl Var {
    fn value(self, p: &Params) -> i64 {
        match self {
            Var::One => 1,
            Var::W => p.w.as_i64(),
            Var::C => p.c.as_i64(),
            Var::Ch => p.ch.as_i64(),
            Var::D => p.d.as_i64(),
            Var::T => p.t.as_i64(),
            Var::B => p.b.as_i64(),
            Var::Z => p.z(),
        }
    }
}

impl Formula {
    /// Accepts e.g. `w - c + d - ch`, `-d+t+b`, `w + 2·d - ch`, `2*d`, with
    /// ASCII or Unicode minus signs.
    pub fn parse(src: &str) -> Result<Self, GameError> {
        let err = |why: &str| GameError::Formula(src.to_string(), why.to_string());
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('−', "-");
        let b = s.as_bytes();
        let mut i = 0;
        let mut terms = Vec::new();
        if b.is_empty() {
            return Err(err("empty"));
        }
        while i < b.len() {
            let mut sign = 1;
            if b[i] == b'+' || b[i] == b'-' {
                if b[i] == b'-' {
                    sign = -1;
                }
                i += 1;
            } else if !terms.is_empty() {
                return Err(err("expected + or -"));
            }
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let coeff: Option<i64> = if i > start { Some(s[start..i].parse().map_err(|_| err("bad number"))?) } else { None };
            if s[i..].starts_with('·') {
                i += '·'.len_utf8();
            } else if i < b.len() && b[i] == b'*' {
                i += 1;
            }
            let var = if s[i..].starts_with("ch") {
                i += 2;
                Some(Var::Ch)
            } else {
                let v = match b.get(i) {
                    Some(b'w') => Some(Var::W),
                    Some(b'c') => Some(Var::C),
                    Some(b'd') => Some(Var::D),
                    Some(b't') => Some(Var::T),
                    Some(b'b') => Some(Var::B),
                    Some(b'z') => Some(Var::Z),
                    _ => None,
                };
                if v.is_some() {
                    i += 1;
                }
                v
            };
            match (coeff, var) {
                (Some(k), Some(v)) => terms.push((sign * k, v)),
                (None, Some(v)) => terms.push((sign, v)),
                (Some(k), None) => terms.push((sign * k, Var::One)),
                (None, None) => return Err(err("expected a term")),
            }
        }
        Ok(Formula { source: src.to_string(), terms })
    }

    pub fn eval(&self, p: &Params) -> i64 {
        self.terms.iter().map(|(k, v)| k * v.value(p)).sum()
    }
}

/// `(node label, [player 0 total, player 1 total])`. Labels match the game
/// trees built by [`super::build_game`]; the two collapsed branches of games 2
/// and 4 are `not-init` and `not-collude`.
pub fn totals(game: GameId) -> &'static [(&'static str, [&'static str; 2])] {
    match game {
        GameId::G1 => &G1,
        GameId::G2 => &G2,
        GameId::G3 => &G3,
        GameId::G4 => &G4,
    }
}

pub fn total_formulas(game: GameId, node: &str) -> Option<[Formula; 2]> {
    totals(game)
        .iter()
        .find(|(n, _)| *n == node)
        .map(|(_, [a, b])| [Formula::parse(a).expect("table formulas parse"), Formula::parse(b).expect("table formulas parse")])
}

const G1: [(&str, [&str; 2]); 9] = [
    ("v4", ["w-c", "w-c"]),
    ("v5", ["w-c+d-ch", "-d"]),
    ("v6", ["w-c+d-ch", "-d"]),
    ("v7", ["-d", "w-c+d-ch"]),
    ("v8", ["w", "w"]),
    ("v9", ["-d", "-d"]),
    ("v10", ["-d", "w-c+d-ch"]),
    ("v11", ["-d", "-d"]),
    ("v12", ["-d", "-d"]),
];

const G2: [(&str, [&str; 2]); 11] = [
    ("not-init", ["w-c", "w-c"]),
    ("not-collude", ["w-c", "w-c"]),
    ("v6", ["w-c", "w-c"]),
    ("v7", ["w-c+d-ch-t-b", "-d+t+b"]),
    ("v8", ["w-c+d-ch", "-d"]),
    ("v9", ["-d+t", "w-c+d-ch-t"]),
    ("v10", ["w-b", "w+b"]),
    ("v11", ["-d+t", "-d-t"]),
    ("v12", ["-d", "w-c+d-ch"]),
    ("v13", ["-d-t-b", "-d+t+b"]),
    ("v14", ["-d", "-d"]),
];

// players (OTH, TRA)
const G3: [(&str, [&str; 2]); 27] = [
    ("v13", ["w-c", "w-c"]),
    ("v14", ["w-c+d-ch", "-d"]),
    ("v15", ["w-c+d-ch", "-d"]),
    ("v16", ["-d", "w-c+d-ch"]),
    ("v17", ["w", "w"]),
    ("v18", ["-d", "-d"]),
    ("v19", ["-d", "w-c+d-ch"]),
    ("v20", ["-d", "-d"]),
    ("v21", ["-d", "-d"]),
    ("v22", ["w-c", "w-c-ch"]),
    ("v23", ["w-c+d-ch", "-d+w-c"]),
    ("v24", ["w-c+d-ch", "-d+w-c"]),
    ("v25", ["-d", "w-c+d-ch"]),
    ("v26", ["-d", "w-c+d-ch"]),
    ("v27", ["-d", "w-c+d-ch"]),
    ("v28", ["-d", "w-c+d-ch"]),
    ("v29", ["-d", "w-c+d-ch"]),
    ("v30", ["-d", "w-c+d-ch"]),
    ("v31", ["w-c", "w-c-ch"]),
    ("v32", ["w-c+d-ch", "-d"]),
    ("v33", ["w-c+d-ch", "-d"]),
    ("v34", ["-d", "w-c+d-ch"]),
    ("v35", ["-d", "-d"]),
    ("v36", ["-d", "-d"]),
    ("v37", ["-d", "w-c+d-ch"]),
    ("v38", ["-d", "-d"]),
    ("v39", ["-d", "-d"]),
];

// players (LDR, FLR)
const G4: [(&str, [&str; 2]); 29] = [
    ("not-init", ["w-c", "w-c"]),
    ("not-collude", ["w-c", "w-c"]),
    ("v15", ["w-c", "w-c"]),
    ("v16", ["w-c+d-ch-t-b", "-d+t+b"]),
    ("v17", ["w-c+d-ch", "-d"]),
    ("v18", ["-d+t", "w-c+d-ch-t"]),
    ("v19", ["w-b", "w+b"]),
    ("v20", ["-d+t", "-d-t"]),
    ("v21", ["-d", "w-c+d-ch"]),
    ("v22", ["-d-t-b", "-d+t+b"]),
    ("v23", ["-d", "-d"]),
    ("v24", ["w-c", "w-c-ch"]),
    ("v25", ["w-c+d-ch-t-b", "-d+w-c+t+b"]),
    ("v26", ["w-c+d-ch", "-d+w-c"]),
    ("v27", ["-d+t", "w-c+d-ch-t"]),
    ("v28", ["-d-b", "w-c+d-ch+b"]),
    ("v29", ["-d+t", "w-c+d-ch-t"]),
    ("v30", ["-d", "w-c+d-ch"]),
    ("v31", ["-d-t-b", "w-c+d-ch+t+b"]),
    ("v32", ["-d", "w-c+d-ch"]),
    ("v33", ["w-c", "w-c-ch"]),
    ("v34", ["w-c+d-ch-t-b", "-d+t+b"]),
    ("v35", ["w-c+d-ch", "-d"]),
    ("v36", ["-d+t", "w-c+d-ch-t"]),
    ("v37", ["-d-b", "-d+b"]),
    // the printed table has -d+t here; the Colluder's contract takes t from a
    // deviating follower
    ("v38", ["-d+t", "-d-t"]),
    ("v39", ["-d", "w-c+d-ch"]),
    ("v40", ["-d-t-b", "-d+t+b"]),
    ("v41", ["-d", "-d"]),
];

#[derive(Clone, Debug, Serialize)]
pub struct CrosscheckRow {
    pub node: String,
    pub outcome: String,
    pub table: [i64; 2],
    pub formulas: [String; 2],
    pub simulated: [i64; 2],
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Crosscheck {
    pub game: GameId,
    pub params: Params,
    pub rows: Vec<CrosscheckRow>,
    pub mismatches: Vec<String>,
}
