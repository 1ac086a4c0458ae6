//! Impression management, willingness to confide and willingness to listen.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::personality::TraitScore;

pub const IM_ITEMS: usize = 20;

/// Where a widget answer or link click lands for scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum OutcomeSlot {
    /// 1-based item number.
    Im { item: u8, reverse: bool },
    WeaknessRating,
    WeaknessAction,
    /// Opinion j in 1..=2.
    OpinionConfidence(u8),
    OpinionAction(u8),
    /// Share action j in 1..=5.
    ListenRating(u8),
    ListenAct(u8),
    /// Tracked link j in 1..=2.
    Click(u8),
}

impl OutcomeSlot {
    /// Values the slot accepts.
    pub fn range(&self) -> core::ops::RangeInclusive<u8> {
        match self {
            OutcomeSlot::Im { .. } => 1..=7,
            OutcomeSlot::WeaknessRating | OutcomeSlot::OpinionConfidence(_) | OutcomeSlot::ListenRating(_) => 1..=3,
            OutcomeSlot::WeaknessAction => 0..=2,
            OutcomeSlot::OpinionAction(_) | OutcomeSlot::ListenAct(_) | OutcomeSlot::Click(_) => 0..=1,
        }
    }

    /// Key under which the value is stored, shared by both keyings of an IM item.
    pub fn key(&self) -> OutcomeSlot {
        match *self {
            OutcomeSlot::Im { item, .. } => OutcomeSlot::Im { item, reverse: false },
            s => s,
        }
    }
}

impl fmt::Display for OutcomeSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeSlot::Im { item, reverse: false } => write!(f, "im.{item}"),
            OutcomeSlot::Im { item, reverse: true } => write!(f, "im.{item}.reverse"),
            OutcomeSlot::WeaknessRating => f.write_str("weakness.rating"),
            OutcomeSlot::WeaknessAction => f.write_str("weakness.action"),
            OutcomeSlot::OpinionConfidence(j) => write!(f, "opinion.{j}.confidence"),
            OutcomeSlot::OpinionAction(j) => write!(f, "opinion.{j}.action"),
            OutcomeSlot::ListenRating(j) => write!(f, "listen.{j}.rating"),
            OutcomeSlot::ListenAct(j) => write!(f, "listen.{j}.act"),
            OutcomeSlot::Click(j) => write!(f, "click.{j}"),
        }
    }
}

impl FromStr for OutcomeSlot {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split('.').collect();
        let num = |p: &str, max: u8| p.parse::<u8>().ok().filter(|n| (1..=max).contains(n));
        let slot = match parts.as_slice() {
            ["im", n] => num(n, IM_ITEMS as u8).map(|item| OutcomeSlot::Im { item, reverse: false }),
            ["im", n, "reverse"] => num(n, IM_ITEMS as u8).map(|item| OutcomeSlot::Im { item, reverse: true }),
            ["weakness", "rating"] => Some(OutcomeSlot::WeaknessRating),
            ["weakness", "action"] => Some(OutcomeSlot::WeaknessAction),
            ["opinion", n, "confidence"] => num(n, 2).map(OutcomeSlot::OpinionConfidence),
            ["opinion", n, "action"] => num(n, 2).map(OutcomeSlot::OpinionAction),
            ["listen", n, "rating"] => num(n, 5).map(OutcomeSlot::ListenRating),
            ["listen", n, "act"] => num(n, 5).map(OutcomeSlot::ListenAct),
            ["click", n] => num(n, 2).map(OutcomeSlot::Click),
            _ => None,
        };
        slot.ok_or_else(|| format!("unknown outcome slot `{s}`"))
    }
}

impl TryFrom<String> for OutcomeSlot {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<OutcomeSlot> for String {
    fn from(s: OutcomeSlot) -> String {
        format!("{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImResponses {
    pub values: [u8; IM_ITEMS],
    pub reverse: [bool; IM_ITEMS],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfideOutcomes {
    /// (rating 1..=3, sAction 0..=2)
    pub weakness: (u8, u8),
    /// (confidence 1..=3, sAction 0..=1) per opinion
    pub opinions: [(u8, u8); 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ListenOutcomes {
    pub clicks: [u8; 2],
    /// (rating 1..=3, act 0..=1) per share action
    pub shares: [(u8, u8); 5],
}

/// Count of items answered 6 or 7 after reverse keying.
pub fn score_im(r: &ImResponses) -> u32 {
    r.values
        .iter()
        .zip(&r.reverse)
        .map(|(&v, &rev)| if rev { 8 - v } else { v })
        .filter(|&v| v >= 6)
        .count() as u32
}

pub fn willingness_confide(o: &ConfideOutcomes) -> u32 {
    let a = o.weakness.0 as u32 * o.weakness.1 as u32;
    a + o.opinions.iter().map(|&(cf, s)| cf as u32 * s as u32).sum::<u32>()
}

pub fn willingness_listen(o: &ListenOutcomes) -> u32 {
    let c: u32 = o.clicks.iter().map(|&c| c as u32).sum();
    c + o.shares.iter().map(|&(r, a)| r as u32 * a as u32).sum::<u32>()
}

/// Collected outcome values, keyed by [`OutcomeSlot::key`].
pub type Outcomes = BTreeMap<OutcomeSlot, u8>;

pub fn im_from(outcomes: &Outcomes, reverse: &[bool; IM_ITEMS]) -> Option<ImResponses> {
    let mut values = [0u8; IM_ITEMS];
    for (i, v) in values.iter_mut().enumerate() {
        *v = *outcomes.get(&OutcomeSlot::Im { item: i as u8 + 1, reverse: false })?;
    }
    Some(ImResponses { values, reverse: *reverse })
}

pub fn confide_from(outcomes: &Outcomes) -> Option<ConfideOutcomes> {
    let get = |s| outcomes.get(&s).copied();
    Some(ConfideOutcomes {
        weakness: (get(OutcomeSlot::WeaknessRating)?, get(OutcomeSlot::WeaknessAction)?),
        opinions: [
            (get(OutcomeSlot::OpinionConfidence(1))?, get(OutcomeSlot::OpinionAction(1))?),
            (get(OutcomeSlot::OpinionConfidence(2))?, get(OutcomeSlot::OpinionAction(2))?),
        ],
    })
}

/// Clicks default to 0: an unclicked link records nothing.
pub fn listen_from(outcomes: &Outcomes) -> Option<ListenOutcomes> {
    let mut shares = [(0u8, 0u8); 5];
    for (j, s) in shares.iter_mut().enumerate() {
        let j = j as u8 + 1;
        *s = (*outcomes.get(&OutcomeSlot::ListenRating(j))?, *outcomes.get(&OutcomeSlot::ListenAct(j))?);
    }
    let click = |j| outcomes.get(&OutcomeSlot::Click(j)).copied().unwrap_or(0);
    Some(ListenOutcomes { clicks: [click(1), click(2)], shares })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub session_id: String,
    /// None when the script did not collect the full instrument.
    pub im: Option<u32>,
    pub wc: Option<u32>,
    pub wl: Option<u32>,
    pub traits: Vec<(String, TraitScore)>,
}

impl ScoreReport {
    pub fn new(session_id: &str, outcomes: &Outcomes, reverse: &[bool; IM_ITEMS], traits: Vec<(String, TraitScore)>) -> Self {
        ScoreReport {
            session_id: String::from(session_id),
            im: im_from(outcomes, reverse).map(|r| score_im(&r)),
            wc: confide_from(outcomes).map(|o| willingness_confide(&o)),
            wl: listen_from(outcomes).map(|o| willingness_listen(&o)),
            traits,
        }
    }
}
