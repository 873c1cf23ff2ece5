//! Finite first-order interpretations of the one-sorted signature.
//!
//! Every interpretation realizes at least the built-in signature: constants
//! `0` and `1`, binary `+`, `-`, `*`, and the relation `<=`; equality is
//! structural and always available. Model files may add further constants,
//! functions and relations. The built-in family `zmod:n` interprets the
//! symbols as arithmetic modulo `n` with `<=` on representatives `0..n-1`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::Symbol;

/// Index into the domain of an interpretation.
pub type Elem = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncTable {
    pub arity: usize,
    /// Total map from argument tuples to results.
    pub table: BTreeMap<Vec<Elem>, Elem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelTable {
    pub arity: usize,
    /// The tuples on which the relation holds.
    pub rows: std::collections::BTreeSet<Vec<Elem>>,
}

/// A finite model: domain elements, constant/function/relation tables, and
/// a canonical constant symbol for every element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    name: String,
    /// Printable identifiers of the domain elements.
    domain: Vec<String>,
    consts: BTreeMap<Symbol, Elem>,
    funcs: BTreeMap<Symbol, FuncTable>,
    rels: BTreeMap<Symbol, RelTable>,
    /// Canonical defining constant per element, injective and total.
    elem_const: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown domain element `{0}`")]
    UnknownElement(String),
    #[error("function `{sym}` is missing a row for ({args})")]
    PartialFunction { sym: Symbol, args: String },
    #[error("inconsistent arity for `{0}`")]
    InconsistentArity(Symbol),
    #[error("domain element `{0}` has no defining constant")]
    UnnamedElement(String),
    #[error("missing built-in symbol `{0}`")]
    MissingBuiltin(Symbol),
    #[error("domain is empty")]
    EmptyDomain,
    #[error("zmod modulus must be at least 2")]
    BadModulus,
}

impl Interpretation {
    /// Integers modulo `n`, with elements named `0..n-1`, a constant per
    /// element, and `<=` on representatives.
    pub fn zmod(n: usize) -> Result<Interpretation, ModelError> {
        if n < 2 {
            return Err(ModelError::BadModulus);
        }
        let domain: Vec<String> = (0..n).map(|k| k.to_string()).collect();
        let mut consts = BTreeMap::new();
        for k in 0..n {
            consts.insert(k.to_string(), k);
        }
        let mut add = BTreeMap::new();
        let mut sub = BTreeMap::new();
        let mut mul = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                add.insert(vec![a, b], (a + b) % n);
                sub.insert(vec![a, b], (a + n - b) % n);
                mul.insert(vec![a, b], (a * b) % n);
            }
        }
        let mut funcs = BTreeMap::new();
        funcs.insert("+".to_string(), FuncTable { arity: 2, table: add });
        funcs.insert("-".to_string(), FuncTable { arity: 2, table: sub });
        funcs.insert("*".to_string(), FuncTable { arity: 2, table: mul });
        let mut le_rows = std::collections::BTreeSet::new();
        for a in 0..n {
            for b in a..n {
                le_rows.insert(vec![a, b]);
            }
        }
        let mut rels = BTreeMap::new();
        rels.insert(
            "<=".to_string(),
            RelTable {
                arity: 2,
                rows: le_rows,
            },
        );
        Ok(Interpretation {
            name: format!("zmod:{n}"),
            elem_const: domain.clone(),
            domain,
            consts,
            funcs,
            rels,
        })
    }

    /// Parses the `.model` file format:
    ///
    /// ```text
    /// # either just the built-in family
    /// zmod 3
    /// # or an explicit model
    /// domain: d0 d1
    /// const 0 = d0
    /// const 1 = d1
    /// fun + : d0 d0 -> d0
    /// ...
    /// rel <= : d0 d1        # one true tuple per row
    /// rel r : arity 2       # declares a relation with no true tuples
    /// ```
    pub fn parse(input: &str) -> Result<Interpretation, ModelError> {
        let mut domain: Vec<String> = Vec::new();
        let mut consts: BTreeMap<Symbol, String> = BTreeMap::new();
        let mut fun_rows: Vec<(Symbol, Vec<String>, String)> = Vec::new();
        let mut rel_rows: Vec<(Symbol, Vec<String>)> = Vec::new();
        let mut rel_decls: Vec<(Symbol, usize)> = Vec::new();

        for (idx, raw) in input.lines().enumerate() {
            let line = idx + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let err = |msg: &str| ModelError::Syntax {
                line,
                msg: msg.to_string(),
            };
            let words: Vec<&str> = text.split_whitespace().collect();
            match words[0] {
                "zmod" => {
                    let n: usize = words
                        .get(1)
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| err("expected `zmod N`"))?;
                    return Interpretation::zmod(n);
                }
                "domain:" => {
                    domain.extend(words[1..].iter().map(|w| w.to_string()));
                }
                "const" => {
                    // const SYM = ELEM
                    if words.len() != 4 || words[2] != "=" {
                        return Err(err("expected `const SYM = ELEM`"));
                    }
                    consts.insert(words[1].to_string(), words[3].to_string());
                }
                "fun" => {
                    // fun SYM : e1 .. ek -> e
                    let arrow = words
                        .iter()
                        .position(|w| *w == "->")
                        .ok_or_else(|| err("expected `->` in fun row"))?;
                    if words.len() < 4 || words[2] != ":" || arrow + 2 != words.len() {
                        return Err(err("expected `fun SYM : ARGS -> RESULT`"));
                    }
                    let args = words[3..arrow].iter().map(|w| w.to_string()).collect();
                    fun_rows.push((words[1].to_string(), args, words[arrow + 1].to_string()));
                }
                "rel" => {
                    if words.len() >= 5 && words[2] == ":" && words[3] == "arity" {
                        let k = words[4]
                            .parse()
                            .map_err(|_| err("expected numeric arity"))?;
                        rel_decls.push((words[1].to_string(), k));
                    } else if words.len() >= 4 && words[2] == ":" {
                        let args = words[3..].iter().map(|w| w.to_string()).collect();
                        rel_rows.push((words[1].to_string(), args));
                    } else {
                        return Err(err("expected `rel SYM : ELEMS` or `rel SYM : arity N`"));
                    }
                }
                other => return Err(err(&format!("unknown directive `{other}`"))),
            }
        }

        if domain.is_empty() {
            return Err(ModelError::EmptyDomain);
        }
        let index: BTreeMap<&str, Elem> = domain
            .iter()
            .enumerate()
            .map(|(i, d)| (d.as_str(), i))
            .collect();
        let lookup = |name: &str| -> Result<Elem, ModelError> {
            index
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::UnknownElement(name.to_string()))
        };

        let mut const_map = BTreeMap::new();
        for (sym, el) in &consts {
            const_map.insert(sym.clone(), lookup(el)?);
        }
        let mut funcs: BTreeMap<Symbol, FuncTable> = BTreeMap::new();
        for (sym, args, res) in &fun_rows {
            let tuple: Vec<Elem> = args.iter().map(|a| lookup(a)).collect::<Result<_, _>>()?;
            let res = lookup(res)?;
            let entry = funcs.entry(sym.clone()).or_insert_with(|| FuncTable {
                arity: tuple.len(),
                table: BTreeMap::new(),
            });
            if entry.arity != tuple.len() {
                return Err(ModelError::InconsistentArity(sym.clone()));
            }
            entry.table.insert(tuple, res);
        }
        let mut rels: BTreeMap<Symbol, RelTable> = BTreeMap::new();
        for (sym, arity) in &rel_decls {
            rels.insert(
                sym.clone(),
                RelTable {
                    arity: *arity,
                    rows: Default::default(),
                },
            );
        }
        for (sym, args) in &rel_rows {
            let tuple: Vec<Elem> = args.iter().map(|a| lookup(a)).collect::<Result<_, _>>()?;
            let entry = rels.entry(sym.clone()).or_insert_with(|| RelTable {
                arity: tuple.len(),
                rows: Default::default(),
            });
            if entry.arity != tuple.len() {
                return Err(ModelError::InconsistentArity(sym.clone()));
            }
            entry.rows.insert(tuple);
        }

        // the built-in signature must be fully interpreted
        for sym in ["0", "1"] {
            if !const_map.contains_key(sym) {
                return Err(ModelError::MissingBuiltin(sym.to_string()));
            }
        }
        for sym in ["+", "-", "*"] {
            if !funcs.contains_key(sym) {
                return Err(ModelError::MissingBuiltin(sym.to_string()));
            }
        }
        if !rels.contains_key("<=") {
            return Err(ModelError::MissingBuiltin("<=".to_string()));
        }

        // totality of functions
        let n = domain.len();
        for (sym, ft) in &funcs {
            let expected = n.pow(ft.arity as u32);
            if ft.table.len() != expected {
                let missing = first_missing(ft, n);
                return Err(ModelError::PartialFunction {
                    sym: sym.clone(),
                    args: missing
                        .iter()
                        .map(|e| domain[*e].clone())
                        .collect::<Vec<_>>()
                        .join(" "),
                });
            }
        }

        // every element needs a defining constant; take the first in symbol order
        let mut elem_const = vec![None; n];
        for (sym, el) in &const_map {
            if elem_const[*el].is_none() {
                elem_const[*el] = Some(sym.clone());
            }
        }
        let elem_const: Vec<Symbol> = elem_const
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| ModelError::UnnamedElement(domain[i].clone())))
            .collect::<Result<_, _>>()?;

        Ok(Interpretation {
            name: "model".to_string(),
            domain,
            consts: const_map,
            funcs,
            rels,
            elem_const,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn element_name(&self, e: Elem) -> &str {
        &self.domain[e]
    }

    /// The canonical defining constant of an element.
    pub fn element_const(&self, e: Elem) -> &Symbol {
        &self.elem_const[e]
    }

    pub fn constant(&self, sym: &str) -> Option<Elem> {
        self.consts.get(sym).copied()
    }

    pub fn func(&self, sym: &str) -> Option<&FuncTable> {
        self.funcs.get(sym)
    }

    pub fn rel(&self, sym: &str) -> Option<&RelTable> {
        self.rels.get(sym)
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (|domain| = {})", self.name, self.domain.len())
    }
}

fn first_missing(ft: &FuncTable, n: usize) -> Vec<Elem> {
    let mut tuple = vec![0; ft.arity];
    loop {
        if !ft.table.contains_key(&tuple) {
            return tuple;
        }
        let mut i = 0;
        loop {
            if i == tuple.len() {
                return tuple; // unreachable when the table is partial
            }
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}
