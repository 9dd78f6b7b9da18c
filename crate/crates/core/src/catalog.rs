//! Named social strategies and the bound-raising lift.

use crate::norm::{Action, SocialStrategy};

fn build(max_reputation: usize, f: impl Fn(usize, usize) -> bool) -> SocialStrategy {
    let side = max_reputation + 1;
    let actions = (0..side * side)
        .map(|p| {
            if f(p / side, p % side) {
                Action::Fulfill
            } else {
                Action::Decline
            }
        })
        .collect();
    SocialStrategy::new(side, actions).expect("catalog sides are in range")
}

/// Decline every request; always sustainable, zero welfare.
pub fn all_decline(max_reputation: usize) -> SocialStrategy {
    build(max_reputation, |_, _| false)
}

/// Fulfill every request; welfare-maximal but never enforceable.
pub fn all_fulfill(max_reputation: usize) -> SocialStrategy {
    build(max_reputation, |_, _| true)
}

/// Fulfill for every client except those at reputation 0.
pub fn serve_nonzero(max_reputation: usize) -> SocialStrategy {
    build(max_reputation, |_, client| client > 0)
}

/// Fulfill everywhere except the single pair (top - 1, 0); the mildest
/// one-cell exclusion, optimal when incentives are cheap to provide.
pub fn single_decline(max_reputation: usize) -> SocialStrategy {
    build(max_reputation, move |server, client| {
        !(server == max_reputation - 1 && client == 0)
    })
}

/// Fulfill exactly when the client's reputation is at least the server's.
pub fn serve_upward(max_reputation: usize) -> SocialStrategy {
    build(max_reputation, |server, client| client >= server)
}

/// The four candidate optima for two reputation labels, ordered from
/// highest to lowest welfare: one-cell exclusion, punish-the-newly-demoted,
/// serve-nonzero, and all-decline.
pub fn two_reputation_ladder() -> Vec<SocialStrategy> {
    vec![
        SocialStrategy::parse("DF/FF").expect("valid"),
        SocialStrategy::parse("FF/DF").expect("valid"),
        serve_nonzero(1),
        all_decline(1),
    ]
}

/// The seven strategies the three-label optimum walks through as the service
/// cost grows, before collapsing to all-decline. Each declines only
/// 0-reputation clients, with progressively more server rows declining.
pub fn three_reputation_ladder() -> Vec<SocialStrategy> {
    [
        "FFF/DFF/FFF",
        "DFF/FFF/FFF",
        "DFF/DFF/FFF",
        "FFF/FFF/DFF",
        "FFF/DFF/DFF",
        "DFF/FFF/DFF",
        "DFF/DFF/DFF",
    ]
    .iter()
    .map(|s| SocialStrategy::parse(s).expect("valid"))
    .collect()
}

/// Extends a strategy to one more reputation label by treating the new top
/// label exactly like the previous top. Preserves welfare and feasibility
/// under maximum punishment.
pub fn lift(strategy: &SocialStrategy) -> SocialStrategy {
    let top = strategy.max_reputation();
    build(top + 1, |server, client| {
        strategy.fulfills(server.min(top), client.min(top))
    })
}

/// Looks up a strategy by its catalog name.
pub fn by_name(name: &str, max_reputation: usize) -> Option<SocialStrategy> {
    match name {
        "all-d" | "all-decline" => Some(all_decline(max_reputation)),
        "all-f" | "all-fulfill" => Some(all_fulfill(max_reputation)),
        "serve-nonzero" => Some(serve_nonzero(max_reputation)),
        "single-decline" if max_reputation >= 1 => Some(single_decline(max_reputation)),
        "serve-upward" => Some(serve_upward(max_reputation)),
        _ => None,
    }
}

/// Names understood by [`by_name`], for help text.
pub const STRATEGY_NAMES: &[&str] = &[
    "all-d",
    "all-f",
    "serve-nonzero",
    "single-decline",
    "serve-upward",
];
