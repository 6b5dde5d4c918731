use super::MacConfig;
use crate::geometry::NodeId;
use crate::time::Micros;

#[derive(Debug, Clone, PartialEq)]
pub struct ContentionEntry {
    pub id: NodeId,
    pub timer: Micros,
    /// Competitors that hear this entry's transmission.
    pub audible_to: Vec<NodeId>,
}

impl ContentionEntry {
    fn heard_by(&self, other: NodeId) -> bool {
        self.audible_to.contains(&other)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentionRound {
    pub entries: Vec<ContentionEntry>,
    /// Airtime of the frame a winner sends (CTF or RELAY_DATA).
    pub response: Micros,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContentionOutcome {
    Winner(NodeId),
    /// Ids of every candidate that transmitted, sorted.
    Collision(Vec<NodeId>),
    Silence,
}

fn sorted(entries: &[ContentionEntry]) -> Vec<&ContentionEntry> {
    let mut order: Vec<&ContentionEntry> = entries.iter().collect();
    order.sort_by(|a, b| a.timer.cmp(&b.timer).then(a.id.cmp(&b.id)));
    order
}

/// Candidates that actually transmit. The earliest timer fires first; a later
/// candidate stays quiet if it heard a transmission that started strictly
/// before its own timer, otherwise it transmits too as long as it fires
/// within the vulnerability window of the first. Hidden candidates firing
/// after the window are silenced by the SELECT or the relayed data.
fn transmitters<'a>(order: &[&'a ContentionEntry], window: Micros) -> Vec<&'a ContentionEntry> {
    let Some(first) = order.first() else {
        return Vec::new();
    };
    let mut on_air = vec![*first];
    for cand in &order[1..] {
        if cand.timer >= first.timer + window && cand.timer > first.timer {
            break;
        }
        let heard = on_air.iter().any(|tx| tx.timer < cand.timer && tx.heard_by(cand.id));
        if !heard {
            on_air.push(cand);
        }
    }
    on_air
}

pub fn resolve_contention(round: &ContentionRound, cfg: &MacConfig) -> ContentionOutcome {
    let order = sorted(&round.entries);
    if order.is_empty() {
        return ContentionOutcome::Silence;
    }
    if cfg.collision_free {
        return ContentionOutcome::Winner(order[0].id);
    }
    let on_air = transmitters(&order, cfg.window_for(round.response));
    if on_air.len() == 1 {
        ContentionOutcome::Winner(on_air[0].id)
    } else {
        let mut ids: Vec<NodeId> = on_air.iter().map(|e| e.id).collect();
        ids.sort();
        ContentionOutcome::Collision(ids)
    }
}

/// Forwarder contention over a whole window.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WindowResult {
    /// Winning candidate and its timer.
    pub winner: Option<(NodeId, Micros)>,
    /// Start time and transmitter set of every collision, in time order.
    pub collisions: Vec<(Micros, Vec<NodeId>)>,
}

impl WindowResult {
    pub fn collided(&self) -> bool {
        !self.collisions.is_empty()
    }
}

/// Resolves forwarder contention while the window lasts. After a collision
/// the source stays silent, candidates that overheard a colliding CTF drop
/// out, and the remaining timers keep running; a winner must fire before
/// `window_end`.
pub fn resolve_window(round: &ContentionRound, cfg: &MacConfig, window_end: Micros) -> WindowResult {
    let mut result = WindowResult::default();
    let mut remaining: Vec<ContentionEntry> = round.entries.iter().filter(|e| e.timer < window_end).cloned().collect();
    loop {
        let sub = ContentionRound { entries: remaining, response: round.response };
        match resolve_contention(&sub, cfg) {
            ContentionOutcome::Silence => return result,
            ContentionOutcome::Winner(id) => {
                let timer = sub.entries.iter().find(|e| e.id == id).map(|e| e.timer).unwrap_or_default();
                result.winner = Some((id, timer));
                return result;
            }
            ContentionOutcome::Collision(ids) => {
                let colliders: Vec<&ContentionEntry> = sub.entries.iter().filter(|e| ids.contains(&e.id)).collect();
                let at = colliders.iter().map(|c| c.timer).min().unwrap_or_default();
                remaining = sub
                    .entries
                    .iter()
                    .filter(|e| !ids.contains(&e.id))
                    .filter(|e| !colliders.iter().any(|c| c.timer < e.timer && c.heard_by(e.id)))
                    .cloned()
                    .collect();
                result.collisions.push((at, ids));
            }
        }
    }
}
