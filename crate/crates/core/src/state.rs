use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Which of the two algorithms a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Refresh / Candidacy? / Withdrawal, with `x` degree variables.
    Byzantine,
    /// Candidacy / Withdrawal?, a single `s` variable.
    Anonymous,
}

impl Algorithm {
    pub fn uses_x(self) -> bool {
        matches!(self, Algorithm::Byzantine)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Byzantine => "byzantine",
            Algorithm::Anonymous => "anonymous",
        }
    }

    /// The unique enabled rule on a non-Byzantine node, if any. The guards of
    /// each algorithm are mutually exclusive so at most one rule applies.
    pub fn enabled_rule(self, g: &Graph, cfg: &Configuration, u: NodeId) -> Option<Rule> {
        match self {
            Algorithm::Byzantine => crate::byzantine::enabled_rule(g, cfg, u),
            Algorithm::Anonymous => crate::anonymous::enabled_rule(g, cfg, u),
        }
    }

    pub fn rules(self) -> &'static [Rule] {
        match self {
            Algorithm::Byzantine => &[Rule::Refresh, Rule::CandidacyQ, Rule::Withdrawal],
            Algorithm::Anonymous => &[Rule::Candidacy, Rule::WithdrawalQ],
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "byzantine" => Ok(Algorithm::Byzantine),
            "anonymous" => Ok(Algorithm::Anonymous),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Rule identifiers of both algorithms plus the marker used for Byzantine
/// activations, which execute no algorithm rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Refresh,
    CandidacyQ,
    Withdrawal,
    Candidacy,
    WithdrawalQ,
    ByzAct,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Refresh => "refresh",
            Rule::CandidacyQ => "candidacy?",
            Rule::Withdrawal => "withdrawal",
            Rule::Candidacy => "candidacy",
            Rule::WithdrawalQ => "withdrawal?",
            Rule::ByzAct => "byz",
        }
    }

    /// Rules whose command draws a coin.
    pub fn is_probabilistic(self) -> bool {
        matches!(self, Rule::CandidacyQ | Rule::WithdrawalQ)
    }

    pub const ALL: [Rule; 6] = [
        Rule::Refresh,
        Rule::CandidacyQ,
        Rule::Withdrawal,
        Rule::Candidacy,
        Rule::WithdrawalQ,
        Rule::ByzAct,
    ];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown rule `{s}`")))
    }
}

/// Local states of every node. `s[u] == true` encodes ⊤. `x` is present only
/// for runs of the Byzantine-tolerant algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub s: Vec<bool>,
    pub x: Option<Vec<u64>>,
}

impl Configuration {
    pub fn anonymous(s: Vec<bool>) -> Self {
        Configuration { s, x: None }
    }

    pub fn byzantine(s: Vec<bool>, x: Vec<u64>) -> Self {
        assert_eq!(s.len(), x.len(), "s and x must cover the same nodes");
        Configuration { s, x: Some(x) }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn top(&self, u: NodeId) -> bool {
        self.s[u]
    }

    /// `x_u`, or 0 for configurations without x-values.
    pub fn x(&self, u: NodeId) -> u64 {
        self.x.as_ref().map_or(0, |x| x[u])
    }

    /// `s` rendered as a 0/1 string (1 = ⊤).
    pub fn s_string(&self) -> String {
        self.s.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn x_string(&self) -> Option<String> {
        self.x.as_ref().map(|x| {
            x.iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(",")
        })
    }

    /// Checks the shape against a graph and algorithm.
    pub fn check_shape(&self, g: &Graph, algo: Algorithm) -> Result<()> {
        if self.s.len() != g.n() {
            return Err(Error::Config(format!(
                "configuration has {} nodes, graph has {}",
                self.s.len(),
                g.n()
            )));
        }
        match (&self.x, algo.uses_x()) {
            (Some(x), true) if x.len() == g.n() => Ok(()),
            (None, false) => Ok(()),
            _ => Err(Error::Config(format!(
                "configuration x-values do not match the {} algorithm",
                algo.name()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_names_round_trip() {
        for r in Rule::ALL {
            assert_eq!(r.as_str().parse::<Rule>().unwrap(), r);
        }
        assert!("refresh?".parse::<Rule>().is_err());
    }

    #[test]
    fn strings() {
        let c = Configuration::byzantine(vec![true, false], vec![3, 0]);
        assert_eq!(c.s_string(), "10");
        assert_eq!(c.x_string().as_deref(), Some("3,0"));
        assert_eq!(Configuration::anonymous(vec![false]).x_string(), None);
    }
}
