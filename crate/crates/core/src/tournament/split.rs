use serde::{Deserialize, Serialize};

use super::{RankingTable, TournamentError};
use crate::rng::GameRng;

/// Groups for a preliminary round and how many advance from each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubTournamentPlan {
    pub groups: Vec<Vec<String>>,
    /// Agents promoted from each group to the final round robin. Zero when
    /// there is a single group (it is the final).
    pub promote_per_group: usize,
}

impl SubTournamentPlan {
    pub fn needs_final(&self) -> bool {
        self.groups.len() > 1
    }

    /// The final's participants: the top `promote_per_group` of each group,
    /// group by group. `rankings[i]` is the ranking of `groups[i]`.
    pub fn finalists(&self, rankings: &[RankingTable]) -> Result<Vec<String>, TournamentError> {
        if rankings.len() != self.groups.len() {
            return Err(TournamentError::InvalidTrackConfig(format!(
                "{} rankings for {} groups",
                rankings.len(),
                self.groups.len()
            )));
        }
        Ok(rankings
            .iter()
            .flat_map(|r| r.rows.iter().take(self.promote_per_group).map(|row| row.agent.clone()))
            .collect())
    }
}

/// Shuffles `agents` with `seed` and deals them into
/// `ceil(n / max_group_size)` groups whose sizes differ by at most one
/// (larger groups first). Each group promotes
/// `ceil(finalist_count / groups)`; `finalist_count` defaults to the group
/// count.
pub fn split_sub_tournaments(
    agents: &[String],
    max_group_size: usize,
    finalist_count: Option<usize>,
    seed: u64,
) -> Result<SubTournamentPlan, TournamentError> {
    if max_group_size < 2 {
        return Err(TournamentError::InvalidGroupSize(max_group_size));
    }
    let n = agents.len();
    if n < 2 {
        return Err(TournamentError::TooFewAgents(n));
    }
    let mut order = agents.to_vec();
    GameRng::from_seed(seed).shuffle(&mut order);
    let groups = n.div_ceil(max_group_size);
    let (base, extra) = (n / groups, n % groups);
    let mut out = Vec::with_capacity(groups);
    let mut rest = order.as_slice();
    for g in 0..groups {
        let size = base + usize::from(g < extra);
        let (head, tail) = rest.split_at(size);
        out.push(head.to_vec());
        rest = tail;
    }
    let promote = if groups == 1 {
        0
    } else {
        finalist_count.unwrap_or(groups).div_ceil(groups)
    };
    Ok(SubTournamentPlan {
        groups: out,
        promote_per_group: promote,
    })
}
