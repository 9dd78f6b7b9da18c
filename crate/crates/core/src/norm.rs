//! Reputation schemes, server actions, and social strategies.

use crate::error::{Error, Result};

/// Server action in the gift-giving stage game. `Decline < Fulfill` fixes
/// the canonical order used for encoding and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Decline,
    Fulfill,
}

impl Action {
    pub fn fulfills(self) -> bool {
        self == Action::Fulfill
    }

    pub fn symbol(self) -> char {
        match self {
            Action::Decline => 'D',
            Action::Fulfill => 'F',
        }
    }

    pub fn from_symbol(ch: char) -> Result<Self> {
        match ch {
            'D' | 'd' => Ok(Action::Decline),
            'F' | 'f' => Ok(Action::Fulfill),
            other => Err(Error::OutOfRange {
                field: "action",
                message: format!("expected 'F' or 'D', found {other:?}"),
            }),
        }
    }
}

/// Bookkeeping rules for reputations `0..=max_reputation`: a correctly
/// reported action moves a server up one step (capped), a reported deviation
/// drops it by `punishment_length` (floored at 0), and newcomers enter at
/// `entry_reputation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReputationScheme {
    max_reputation: usize,
    punishment_length: usize,
    entry_reputation: usize,
}

impl ReputationScheme {
    /// Largest supported reputation bound; keeps value systems well inside
    /// double precision and canonical indices inside `u128`.
    pub const MAX_SUPPORTED: usize = 8;

    pub fn new(
        max_reputation: usize,
        punishment_length: usize,
        entry_reputation: usize,
    ) -> Result<Self> {
        if max_reputation == 0 || max_reputation > Self::MAX_SUPPORTED {
            return Err(Error::OutOfRange {
                field: "max_reputation",
                message: format!("must lie in 1..={}", Self::MAX_SUPPORTED),
            });
        }
        if punishment_length == 0 || punishment_length > max_reputation {
            return Err(Error::OutOfRange {
                field: "punishment_length",
                message: format!("must lie in 1..={max_reputation}"),
            });
        }
        if entry_reputation > max_reputation {
            return Err(Error::OutOfRange {
                field: "entry_reputation",
                message: format!("must lie in 0..={max_reputation}"),
            });
        }
        Ok(Self {
            max_reputation,
            punishment_length,
            entry_reputation,
        })
    }

    /// The scheme that drops any reported deviation straight to 0 and admits
    /// newcomers at the top.
    pub fn max_punishment(max_reputation: usize) -> Result<Self> {
        Self::new(max_reputation, max_reputation, max_reputation)
    }

    pub fn max_reputation(&self) -> usize {
        self.max_reputation
    }

    pub fn punishment_length(&self) -> usize {
        self.punishment_length
    }

    pub fn entry_reputation(&self) -> usize {
        self.entry_reputation
    }

    /// Number of reputation labels, `max_reputation + 1`.
    pub fn reputation_count(&self) -> usize {
        self.max_reputation + 1
    }

    pub fn is_max_punishment(&self) -> bool {
        self.punishment_length == self.max_reputation
    }

    /// Reputation after a correctly reported action.
    pub fn promoted(&self, reputation: usize) -> usize {
        (reputation + 1).min(self.max_reputation)
    }

    /// Reputation after a reported deviation.
    pub fn punished(&self, reputation: usize) -> usize {
        reputation.saturating_sub(self.punishment_length)
    }
}

/// Prescribed server action as a function of (server reputation, client
/// reputation), stored row-major with the server reputation as the row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SocialStrategy {
    side: usize,
    actions: Vec<Action>,
}

impl SocialStrategy {
    pub fn new(side: usize, actions: Vec<Action>) -> Result<Self> {
        if !(2..=ReputationScheme::MAX_SUPPORTED + 1).contains(&side) {
            return Err(Error::OutOfRange {
                field: "strategy side",
                message: format!("must lie in 2..={}", ReputationScheme::MAX_SUPPORTED + 1),
            });
        }
        if actions.len() != side * side {
            return Err(Error::DimensionMismatch {
                strategy_side: actions.len(),
                scheme_side: side * side,
            });
        }
        Ok(Self { side, actions })
    }

    /// Decodes a canonical index: bit `p` of `index` is entry `p` of the
    /// row-major flattening, with `Fulfill = 1`.
    pub fn from_index(index: u128, side: usize) -> Result<Self> {
        let cells = side * side;
        let actions = (0..cells)
            .map(|p| {
                if index >> p & 1 == 1 {
                    Action::Fulfill
                } else {
                    Action::Decline
                }
            })
            .collect();
        Self::new(side, actions)
    }

    /// Parses a row-major `F`/`D` string; `/`, `,`, and whitespace between
    /// rows are accepted and ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let actions: Vec<Action> = text
            .chars()
            .filter(|ch| !matches!(ch, '/' | ',' | ' ' | '\t'))
            .map(Action::from_symbol)
            .collect::<Result<_>>()?;
        let side = (actions.len() as f64).sqrt().round() as usize;
        if side * side != actions.len() {
            return Err(Error::OutOfRange {
                field: "strategy",
                message: format!("{} entries do not form a square matrix", actions.len()),
            });
        }
        Self::new(side, actions)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn max_reputation(&self) -> usize {
        self.side - 1
    }

    /// Action prescribed to a `server`-reputation agent facing a `client`.
    pub fn action(&self, server: usize, client: usize) -> Action {
        self.actions[server * self.side + client]
    }

    pub fn fulfills(&self, server: usize, client: usize) -> bool {
        self.action(server, client).fulfills()
    }

    /// Whether the server row prescribes `Fulfill` for at least one client.
    pub fn row_has_fulfill(&self, server: usize) -> bool {
        self.row(server).iter().any(|a| a.fulfills())
    }

    pub fn row(&self, server: usize) -> &[Action] {
        &self.actions[server * self.side..(server + 1) * self.side]
    }

    /// Unique integer in `[0, 2^(side^2))`; 0 is all-decline, the maximum is
    /// all-fulfill. Used for enumeration order and deterministic tie-breaks.
    pub fn canonical_index(&self) -> u128 {
        self.actions
            .iter()
            .enumerate()
            .map(|(p, a)| (a.fulfills() as u128) << p)
            .sum()
    }

    /// Row-major `F`/`D` string, e.g. `"DFFF"` for the rows `DF`, `FF`.
    pub fn matrix_string(&self) -> String {
        self.actions.iter().map(|a| a.symbol()).collect()
    }

    /// Copy with one entry replaced.
    pub fn with_action(&self, server: usize, client: usize, action: Action) -> Self {
        let mut actions = self.actions.clone();
        actions[server * self.side + client] = action;
        Self {
            side: self.side,
            actions,
        }
    }
}

impl std::fmt::Display for SocialStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for server in 0..self.side {
            if server > 0 {
                f.write_str("/")?;
            }
            for client in 0..self.side {
                write!(f, "{}", self.action(server, client).symbol())?;
            }
        }
        Ok(())
    }
}

/// A reputation scheme together with the strategy agents are expected to follow.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialNorm {
    pub scheme: ReputationScheme,
    pub strategy: SocialStrategy,
}

impl SocialNorm {
    pub fn new(scheme: ReputationScheme, strategy: SocialStrategy) -> Result<Self> {
        if strategy.side() != scheme.reputation_count() {
            return Err(Error::DimensionMismatch {
                strategy_side: strategy.side(),
                scheme_side: scheme.reputation_count(),
            });
        }
        Ok(Self { scheme, strategy })
    }
}

/// Largest reputation bound for which exhaustive strategy enumeration is
/// allowed (`2^16` strategies at the limit).
pub const ENUMERATION_LIMIT: usize = 3;

/// Number of distinct strategies for a given bound: `2^((L+1)^2)`.
pub fn strategy_space_size(max_reputation: usize) -> Result<u64> {
    if max_reputation > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            max_reputation,
            limit: ENUMERATION_LIMIT,
        });
    }
    let side = max_reputation + 1;
    Ok(1u64 << (side * side))
}

/// Yields every strategy exactly once in canonical-index order, starting at
/// the all-decline strategy.
pub fn enumerate_strategies(
    max_reputation: usize,
) -> Result<impl Iterator<Item = SocialStrategy> + Clone> {
    let count = strategy_space_size(max_reputation)?;
    let side = max_reputation + 1;
    Ok((0..count).map(move |index| {
        SocialStrategy::from_index(index as u128, side).expect("side within bounds")
    }))
}
