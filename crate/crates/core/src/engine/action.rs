use serde::{Deserialize, Serialize};

use super::{EngineError, GameState, InstanceId, Seat};
use crate::cards::{CardKind, ChosenKind, HeroPower, HERO_POWER_COST};

/// A character on the board: a hero (by seat) or a minion (by instance).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    Hero(Seat),
    Minion(InstanceId),
}

/// The move alphabet of the active player.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    EndTurn,
    PlayCard {
        hand_index: usize,
        /// Board slot for minions. Enumerated only as "append at the end".
        position: Option<usize>,
        target: Option<Target>,
    },
    Attack {
        attacker: InstanceId,
        defender: Target,
    },
    HeroPower {
        target: Option<Target>,
    },
    HeroAttack {
        defender: Target,
    },
}

impl GameState {
    /// Every action the active player may take, each exactly once, in a fixed
    /// order: end turn, card plays by hand index, hero power, minion attacks
    /// by board order, hero attacks.
    pub fn legal_actions(&self) -> Result<Vec<Action>, EngineError> {
        if self.result.is_some() {
            return Err(EngineError::GameAlreadyOver);
        }
        let mut out = Vec::with_capacity(16);
        self.push_legal_actions(&mut out);
        Ok(out)
    }

    pub(crate) fn push_legal_actions(&self, out: &mut Vec<Action>) {
        let seat = self.active;
        let me = self.player(seat);
        let board_full = me.board.len() >= self.config.board_limit;
        out.push(Action::EndTurn);

        for (hand_index, inst) in me.hand.iter().enumerate() {
            let Some(def) = self.cards.get(inst.card.as_str()) else {
                continue;
            };
            if def.cost > me.mana_current {
                continue;
            }
            let chosen = def.chosen_target_kind();
            match def.kind {
                CardKind::Minion | CardKind::Weapon => {
                    if def.kind == CardKind::Minion && board_full {
                        continue;
                    }
                    let position = (def.kind == CardKind::Minion).then_some(me.board.len());
                    let targets = chosen.map(|k| self.chosen_targets(k)).unwrap_or_default();
                    if targets.is_empty() {
                        out.push(Action::PlayCard {
                            hand_index,
                            position,
                            target: None,
                        });
                    } else {
                        out.extend(targets.into_iter().map(|t| Action::PlayCard {
                            hand_index,
                            position,
                            target: Some(t),
                        }));
                    }
                }
                CardKind::Spell => match chosen {
                    None => out.push(Action::PlayCard {
                        hand_index,
                        position: None,
                        target: None,
                    }),
                    Some(k) => out.extend(self.chosen_targets(k).into_iter().map(|t| Action::PlayCard {
                        hand_index,
                        position: None,
                        target: Some(t),
                    })),
                },
                CardKind::Secret => {
                    if !me.secrets.iter().any(|s| s.card == inst.card) {
                        out.push(Action::PlayCard {
                            hand_index,
                            position: None,
                            target: None,
                        });
                    }
                }
            }
        }

        if !me.hero_power_used && me.mana_current >= HERO_POWER_COST {
            match me.hero_power() {
                HeroPower::Recruit => {
                    if !board_full {
                        out.push(Action::HeroPower { target: None });
                    }
                }
                HeroPower::Ping | HeroPower::Mend => out.extend(
                    self.chosen_targets(ChosenKind::Character)
                        .into_iter()
                        .map(|t| Action::HeroPower { target: Some(t) }),
                ),
            }
        }

        let defenders = self.attack_targets(seat);
        for m in &me.board {
            if m.can_attack() {
                out.extend(defenders.iter().map(|&d| Action::Attack {
                    attacker: m.instance_id,
                    defender: d,
                }));
            }
        }
        if let Some(w) = &me.weapon {
            if w.durability >= 1 && me.hero_attacks_this_turn == 0 {
                out.extend(defenders.iter().map(|&d| Action::HeroAttack { defender: d }));
            }
        }
    }

    /// Targets selectable when a card or hero power asks for one:
    /// own hero, own minions, enemy hero, enemy minions.
    pub(crate) fn chosen_targets(&self, kind: ChosenKind) -> Vec<Target> {
        let mut out = Vec::new();
        for seat in [self.active, self.active.other()] {
            if kind == ChosenKind::Character {
                out.push(Target::Hero(seat));
            }
            out.extend(self.player(seat).board.iter().map(|m| Target::Minion(m.instance_id)));
        }
        out
    }

    /// Legal defenders for attacks by `seat`: enemy taunt minions if any,
    /// otherwise the enemy hero followed by every enemy minion.
    pub(crate) fn attack_targets(&self, seat: Seat) -> Vec<Target> {
        let enemy = self.player(seat.other());
        if enemy.board.iter().any(|m| m.taunt) {
            enemy
                .board
                .iter()
                .filter(|m| m.taunt)
                .map(|m| Target::Minion(m.instance_id))
                .collect()
        } else {
            std::iter::once(Target::Hero(seat.other()))
                .chain(enemy.board.iter().map(|m| Target::Minion(m.instance_id)))
                .collect()
        }
    }
}
