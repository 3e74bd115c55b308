//! Query point selection.
//!
//! Syntax: `all`, a comma separated id list (`3,17,42`), or `random:N`;
//! any of these may be followed by `,+singular` to append the points tagged
//! singular in the labels file. Random draws never pick a tagged point.

use std::str::FromStr;

use rand::seq::index;
use tardis_core::sampler::{derive_seed, generator};

/// Seed stream reserved for query sampling.
const QUERY_STREAM: u64 = 0x5155_4552_5953;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Base {
    All,
    Ids(Vec<usize>),
    Random(usize),
    /// Only the appended singular points.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySelection {
    pub base: Base,
    pub singular: bool,
}

impl Default for QuerySelection {
    fn default() -> Self {
        Self { base: Base::All, singular: false }
    }
}

impl FromStr for QuerySelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut singular = false;
        let mut base = None;
        let mut ids = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "+singular" => singular = true,
                "all" => base = Some(Base::All),
                _ => {
                    if let Some(n) = part.strip_prefix("random:") {
                        let n = n.parse().map_err(|_| format!("bad random count {n:?}"))?;
                        base = Some(Base::Random(n));
                    } else {
                        ids.push(part.parse().map_err(|_| format!("bad query {part:?}"))?);
                    }
                }
            }
        }
        let base = match (base, ids.is_empty()) {
            (Some(_), false) => return Err("point ids cannot be combined with `all` or `random:`".into()),
            (Some(b), true) => b,
            (None, false) => Base::Ids(ids),
            (None, true) if singular => Base::None,
            (None, true) => return Err("empty query selection".into()),
        };
        Ok(Self { base, singular })
    }
}

impl std::fmt::Display for QuerySelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = match &self.base {
            Base::All => vec!["all".into()],
            Base::Ids(ids) => ids.iter().map(usize::to_string).collect(),
            Base::Random(n) => vec![format!("random:{n}")],
            Base::None => vec![],
        };
        if self.singular {
            parts.push("+singular".into());
        }
        f.write_str(&parts.join(","))
    }
}

impl QuerySelection {
    /// Resolves the selection against a cloud of `len` points.
    pub fn resolve(&self, len: usize, singular: &[usize], seed: u64) -> Result<Vec<usize>, String> {
        if self.singular && singular.is_empty() {
            return Err("`+singular` requested but no points are tagged singular".into());
        }
        let mut ids = match &self.base {
            Base::All => (0..len).collect(),
            Base::None => Vec::new(),
            Base::Ids(ids) => {
                if let Some(&bad) = ids.iter().find(|&&i| i >= len) {
                    return Err(format!("query id {bad} out of range for {len} points"));
                }
                ids.clone()
            }
            Base::Random(n) => {
                let pool: Vec<usize> = (0..len).filter(|i| !singular.contains(i)).collect();
                if *n > pool.len() {
                    return Err(format!("cannot draw {n} distinct points from {}", pool.len()));
                }
                let mut rng = generator(derive_seed(seed, &[QUERY_STREAM]));
                index::sample(&mut rng, pool.len(), *n).into_iter().map(|i| pool[i]).collect()
            }
        };
        if self.singular {
            ids.extend(singular.iter().filter(|&&s| s < len));
        }
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        let q: QuerySelection = "random:50,+singular".parse().unwrap();
        assert_eq!(q, QuerySelection { base: Base::Random(50), singular: true });
        assert_eq!("1, 4,9".parse::<QuerySelection>().unwrap().base, Base::Ids(vec![1, 4, 9]));
        assert_eq!("+singular".parse::<QuerySelection>().unwrap().base, Base::None);
        assert!("all,3".parse::<QuerySelection>().is_err());
        assert!("random:x".parse::<QuerySelection>().is_err());
        assert!("".parse::<QuerySelection>().is_err());
        for s in ["all", "random:5,+singular", "1,2,3"] {
            assert_eq!(s.parse::<QuerySelection>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn random_excludes_singular_and_appends_it() {
        let q: QuerySelection = "random:9,+singular".parse().unwrap();
        let ids = q.resolve(10, &[9], 1).unwrap();
        assert_eq!(ids.len(), 10);
        assert_eq!(ids[9], 9);
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
        assert_eq!(q.resolve(10, &[9], 1).unwrap(), ids);
        assert!(q.resolve(10, &[], 1).is_err());
        assert!("random:11".parse::<QuerySelection>().unwrap().resolve(10, &[], 0).is_err());
        assert!("10".parse::<QuerySelection>().unwrap().resolve(10, &[], 0).is_err());
    }
}
