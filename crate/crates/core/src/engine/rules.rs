//! Turn structure, card play, combat and effect resolution.
//!
//! Resolution order: effects of one card resolve in listed order, then the
//! death sweep runs. The sweep removes dead minions (active player's board
//! first, each board left to right), refreshes auras, then resolves their
//! deathrattles in that same order, repeating until nothing else dies.
//! Random targets draw from the state generator at the moment they resolve.

use std::sync::Arc;

use super::{
    Action, CardInstance, EndReason, Event, GameEvent, GameResult, GameState, InstanceId, MinionInstance, Outcome,
    Seat, SecretInstance, Target, WeaponState, MAX_MANA, STARTING_HEALTH,
};
use crate::cards::{
    CardDefinition, CardKind, EffectAction, EffectScript, EffectTarget, HeroPower, SecretCondition, Trigger,
    HERO_POWER_COST, RECRUIT_TOKEN,
};

pub(crate) fn minion_from_def(instance_id: InstanceId, def: &CardDefinition, token: bool) -> MinionInstance {
    MinionInstance {
        instance_id,
        card: def.id.clone(),
        token,
        tribe: def.tribe,
        taunt: def.taunt,
        base_attack: def.attack as i32,
        base_health: def.health_or_durability as i32,
        damage: 0,
        aura_attack: 0,
        aura_health: 0,
        exhausted: true,
        attacks_this_turn: 0,
        destroyed: false,
        has_aura: def.has_trigger(|t| t == Trigger::Aura),
        has_deathrattle: def.has_trigger(|t| t == Trigger::Deathrattle),
    }
}

impl GameState {
    pub(crate) fn log(&mut self, event: Event) {
        if self.record_events {
            let ordinal = self.events.len() as u64;
            self.events.push(GameEvent { ordinal, event });
        }
    }

    fn fresh_id(&mut self) -> InstanceId {
        let id = self.next_instance_id;
        self.next_instance_id += 1;
        id
    }

    pub(crate) fn dispatch(&mut self, action: &Action) {
        match *action {
            Action::EndTurn => self.end_turn(),
            Action::PlayCard {
                hand_index,
                position,
                target,
            } => self.play_card(hand_index, position, target),
            Action::Attack { attacker, defender } => self.minion_attack(attacker, defender),
            Action::HeroPower { target } => self.use_hero_power(target),
            Action::HeroAttack { defender } => self.hero_attack(defender),
        }
    }

    fn end_turn(&mut self) {
        let seat = self.active;
        self.log(Event::TurnEnded {
            seat,
            turn: self.turn_number,
        });
        if self.turn_number >= self.config.turn_limit && self.result.is_none() {
            let result = GameResult {
                outcome: Outcome::Draw,
                reason: EndReason::TurnLimit,
                final_turn: self.turn_number,
            };
            self.result = Some(result);
            self.log(Event::GameEnded { result });
            return;
        }
        self.active = seat.other();
        self.begin_turn();
    }

    /// Starts the active player's turn: one more mana crystal (capped),
    /// refill, reset per-turn flags, wake minions, draw.
    pub(crate) fn begin_turn(&mut self) {
        self.turn_number += 1;
        let seat = self.active;
        let p = &mut self.players[seat.index()];
        p.mana_max = (p.mana_max + 1).min(MAX_MANA);
        p.mana_current = p.mana_max;
        p.hero_power_used = false;
        p.hero_attacks_this_turn = 0;
        for m in &mut p.board {
            m.exhausted = false;
            m.attacks_this_turn = 0;
        }
        self.log(Event::TurnStarted {
            seat,
            turn: self.turn_number,
        });
        self.draw_card(seat);
    }

    /// Draws the top card. A full hand burns it; an empty deck deals
    /// fatigue damage 1, 2, 3, ... on consecutive empty draws.
    pub(crate) fn draw_card(&mut self, seat: Seat) {
        let hand_limit = self.config.hand_limit;
        let p = &mut self.players[seat.index()];
        match p.deck.pop() {
            Some(card) => {
                let burned = p.hand.len() >= hand_limit;
                let event = Event::CardDrawn {
                    seat,
                    instance_id: card.instance_id,
                    card: card.card.clone(),
                    burned,
                };
                if burned {
                    p.graveyard.push(card);
                } else {
                    p.hand.push(card);
                }
                self.log(event);
            }
            None => {
                p.fatigue_counter += 1;
                let amount = p.fatigue_counter;
                p.hero_health -= amount as i32;
                self.log(Event::FatigueDamage { seat, amount });
            }
        }
    }

    fn play_card(&mut self, hand_index: usize, position: Option<usize>, target: Option<Target>) {
        let seat = self.active;
        let cards = Arc::clone(&self.cards);
        let p = &mut self.players[seat.index()];
        let inst = p.hand.remove(hand_index);
        let def = cards.get(inst.card.as_str()).expect("card in play is known");
        p.mana_current -= def.cost;
        self.log(Event::CardPlayed {
            seat,
            instance_id: inst.instance_id,
            card: inst.card.clone(),
            target,
        });
        match def.kind {
            CardKind::Minion => {
                let at = position.unwrap_or(usize::MAX);
                let id = inst.instance_id;
                self.place_minion(seat, minion_from_def(id, def, false), at);
                for e in def.effects_with(Trigger::Battlecry) {
                    self.resolve_effect(seat, Some(id), e, target, None);
                }
                self.death_sweep();
                self.fire_secrets(
                    seat.other(),
                    SecretCondition::EnemyPlaysMinion,
                    Some(Target::Minion(id)),
                );
            }
            CardKind::Spell => {
                for e in def.effects_with(Trigger::OnCast) {
                    self.resolve_effect(seat, None, e, target, None);
                }
                self.players[seat.index()].graveyard.push(inst);
                self.death_sweep();
                self.fire_secrets(seat.other(), SecretCondition::EnemySpellCast, None);
            }
            CardKind::Secret => {
                let condition = def.secret_condition().expect("secret has a condition");
                self.players[seat.index()].secrets.push(SecretInstance {
                    instance_id: inst.instance_id,
                    card: inst.card,
                    condition,
                });
            }
            CardKind::Weapon => {
                self.destroy_weapon(seat);
                self.players[seat.index()].weapon = Some(WeaponState {
                    instance_id: inst.instance_id,
                    card: inst.card,
                    attack: def.attack as i32,
                    durability: def.health_or_durability as i32,
                });
                for e in def.effects_with(Trigger::Battlecry) {
                    self.resolve_effect(seat, None, e, target, None);
                }
                self.death_sweep();
            }
        }
    }

    fn place_minion(&mut self, seat: Seat, minion: MinionInstance, position: usize) {
        let p = &mut self.players[seat.index()];
        let at = position.min(p.board.len());
        let event = Event::MinionSummoned {
            seat,
            instance_id: minion.instance_id,
            card: minion.card.clone(),
            position: at,
        };
        p.board.insert(at, minion);
        self.log(event);
        self.refresh_auras();
    }

    fn summon_token(&mut self, seat: Seat, card: &str) {
        if self.players[seat.index()].board.len() >= self.config.board_limit {
            return;
        }
        let cards = Arc::clone(&self.cards);
        let Some(def) = cards.get(card) else { return };
        let id = self.fresh_id();
        self.place_minion(seat, minion_from_def(id, def, true), usize::MAX);
    }

    fn use_hero_power(&mut self, target: Option<Target>) {
        let seat = self.active;
        let p = &mut self.players[seat.index()];
        p.mana_current -= HERO_POWER_COST;
        p.hero_power_used = true;
        match (p.hero_power(), target) {
            (HeroPower::Ping, Some(t)) => self.deal_damage(t, 1),
            (HeroPower::Mend, Some(t)) => self.heal(t, 2),
            (HeroPower::Recruit, _) => self.summon_token(seat, RECRUIT_TOKEN),
            _ => {}
        }
        self.death_sweep();
    }

    fn minion_attack(&mut self, attacker: InstanceId, defender: Target) {
        let seat = self.active;
        if let Some(m) = self.minion_mut(attacker) {
            m.attacks_this_turn += 1;
        }
        self.fire_secrets(
            seat.other(),
            SecretCondition::EnemyMinionAttacks,
            Some(Target::Minion(attacker)),
        );
        let Some(atk) = self.live_minion(attacker).map(|m| m.attack()) else {
            self.death_sweep();
            return;
        };
        let counter = match defender {
            Target::Hero(_) => Some(0),
            Target::Minion(id) => self.live_minion(id).map(|m| m.attack()),
        };
        if let Some(counter) = counter {
            self.deal_damage(defender, atk as u32);
            if matches!(defender, Target::Minion(_)) {
                self.deal_damage(Target::Minion(attacker), counter as u32);
            }
            self.log(Event::AttackResolved {
                attacker: Target::Minion(attacker),
                defender,
            });
        }
        self.death_sweep();
    }

    fn hero_attack(&mut self, defender: Target) {
        let seat = self.active;
        let p = &mut self.players[seat.index()];
        p.hero_attacks_this_turn += 1;
        let atk = p.weapon.as_ref().map_or(0, |w| w.attack);
        let counter = match defender {
            Target::Hero(_) => 0,
            Target::Minion(id) => self.live_minion(id).map_or(0, |m| m.attack()),
        };
        self.deal_damage(defender, atk as u32);
        if matches!(defender, Target::Minion(_)) {
            self.deal_damage(Target::Hero(seat), counter as u32);
        }
        self.log(Event::AttackResolved {
            attacker: Target::Hero(seat),
            defender,
        });
        let broken = match &mut self.players[seat.index()].weapon {
            Some(w) => {
                w.durability -= 1;
                w.durability <= 0
            }
            None => false,
        };
        if broken {
            self.destroy_weapon(seat);
        }
        self.death_sweep();
    }

    fn destroy_weapon(&mut self, seat: Seat) {
        let p = &mut self.players[seat.index()];
        if let Some(w) = p.weapon.take() {
            p.graveyard.push(CardInstance {
                instance_id: w.instance_id,
                card: w.card.clone(),
            });
            self.log(Event::WeaponBroken {
                seat,
                instance_id: w.instance_id,
                card: w.card,
            });
        }
    }

    /// Fires every secret of `owner` matching `condition`, in play order.
    /// Each secret leaves play before its effect resolves.
    fn fire_secrets(&mut self, owner: Seat, condition: SecretCondition, trigger: Option<Target>) {
        loop {
            let p = &mut self.players[owner.index()];
            let Some(pos) = p.secrets.iter().position(|s| s.condition == condition) else {
                break;
            };
            let secret = p.secrets.remove(pos);
            p.graveyard.push(CardInstance {
                instance_id: secret.instance_id,
                card: secret.card.clone(),
            });
            self.log(Event::SecretRevealed {
                seat: owner,
                instance_id: secret.instance_id,
                card: secret.card.clone(),
            });
            let cards = Arc::clone(&self.cards);
            if let Some(def) = cards.get(secret.card.as_str()) {
                for e in &def.effects {
                    self.resolve_effect(owner, None, e, None, trigger);
                }
            }
            self.death_sweep();
        }
    }

    fn locate(&self, id: InstanceId) -> Option<(Seat, usize)> {
        Seat::BOTH.into_iter().find_map(|seat| {
            self.players[seat.index()]
                .board
                .iter()
                .position(|m| m.instance_id == id)
                .map(|i| (seat, i))
        })
    }

    fn minion_mut(&mut self, id: InstanceId) -> Option<&mut MinionInstance> {
        let (seat, i) = self.locate(id)?;
        Some(&mut self.players[seat.index()].board[i])
    }

    fn live_minion(&self, id: InstanceId) -> Option<&MinionInstance> {
        let (seat, i) = self.locate(id)?;
        let m = &self.players[seat.index()].board[i];
        (!m.is_dead()).then_some(m)
    }

    pub(crate) fn deal_damage(&mut self, target: Target, amount: u32) {
        if amount == 0 {
            return;
        }
        match target {
            Target::Hero(seat) => self.players[seat.index()].hero_health -= amount as i32,
            Target::Minion(id) => match self.minion_mut(id) {
                Some(m) => m.damage += amount as i32,
                None => return,
            },
        }
        self.log(Event::DamageDealt { target, amount });
    }

    pub(crate) fn heal(&mut self, target: Target, amount: u32) {
        let healed = match target {
            Target::Hero(seat) => {
                let p = &mut self.players[seat.index()];
                let before = p.hero_health;
                p.hero_health = (p.hero_health + amount as i32).min(STARTING_HEALTH).max(before);
                p.hero_health - before
            }
            Target::Minion(id) => match self.minion_mut(id) {
                Some(m) => {
                    let h = m.damage.min(amount as i32).max(0);
                    m.damage -= h;
                    h
                }
                None => 0,
            },
        };
        if healed > 0 {
            self.log(Event::Healed {
                target,
                amount: healed as u32,
            });
        }
    }

    fn minions_of(&self, seat: Seat, pred: impl Fn(&MinionInstance) -> bool) -> Vec<Target> {
        self.players[seat.index()]
            .board
            .iter()
            .filter(|m| !m.is_dead() && pred(m))
            .map(|m| Target::Minion(m.instance_id))
            .collect()
    }

    /// Resolves one scripted effect owned by `owner`.
    pub(crate) fn resolve_effect(
        &mut self,
        owner: Seat,
        source: Option<InstanceId>,
        effect: &EffectScript,
        chosen: Option<Target>,
        trigger: Option<Target>,
    ) {
        let enemy = owner.other();
        let targets: Vec<Target> = match effect.target {
            EffectTarget::ChosenTarget => chosen.into_iter().collect(),
            EffectTarget::SelfMinion => source.map(Target::Minion).into_iter().collect(),
            EffectTarget::OwnHero => vec![Target::Hero(owner)],
            EffectTarget::EnemyHero => vec![Target::Hero(enemy)],
            EffectTarget::AllEnemyMinions => self.minions_of(enemy, |_| true),
            EffectTarget::AllFriendlyMinions => self.minions_of(owner, |_| true),
            EffectTarget::FriendlyMinionsOfTribe(t) => self.minions_of(owner, |m| m.tribe == Some(t)),
            EffectTarget::RandomEnemyMinion => {
                let pool = self.minions_of(enemy, |_| true);
                if pool.is_empty() {
                    vec![]
                } else {
                    vec![pool[self.rng.below(pool.len())]]
                }
            }
            EffectTarget::TriggeringEntity => trigger.into_iter().collect(),
        };
        for t in targets {
            match &effect.action {
                EffectAction::Damage(n) => self.deal_damage(t, *n),
                EffectAction::Heal(n) => self.heal(t, *n),
                EffectAction::BuffAttack(n) => {
                    if let Target::Minion(id) = t {
                        if let Some(m) = self.minion_mut(id) {
                            m.base_attack += *n as i32;
                        }
                    }
                }
                EffectAction::BuffHealth(n) => {
                    if let Target::Minion(id) = t {
                        if let Some(m) = self.minion_mut(id) {
                            m.base_health += *n as i32;
                        }
                    }
                }
                EffectAction::DestroyMinion => {
                    if let Target::Minion(id) = t {
                        if let Some(m) = self.minion_mut(id) {
                            m.destroyed = true;
                        }
                    }
                }
                EffectAction::DrawCards(n) => {
                    if let Target::Hero(side) = t {
                        for _ in 0..*n {
                            self.draw_card(side);
                        }
                    }
                }
                EffectAction::SummonToken(card) => {
                    if let Target::Hero(side) = t {
                        self.summon_token(side, card.as_str());
                    }
                }
                EffectAction::DestroyWeapon => {
                    if let Target::Hero(side) = t {
                        self.destroy_weapon(side);
                    }
                }
                EffectAction::GainMana(n) => {
                    if let Target::Hero(side) = t {
                        let p = &mut self.players[side.index()];
                        p.mana_max = (p.mana_max + n).min(MAX_MANA);
                        p.mana_current = (p.mana_current + n).min(p.mana_max);
                    }
                }
            }
        }
        self.refresh_auras();
    }

    /// Recomputes every aura contribution from scratch. An aura applies to
    /// matching friendly minions other than its source.
    pub(crate) fn refresh_auras(&mut self) {
        let cards = Arc::clone(&self.cards);
        for p in &mut self.players {
            let mut auras: Vec<(InstanceId, &EffectScript)> = Vec::new();
            for m in p.board.iter().filter(|m| m.has_aura) {
                if let Some(def) = cards.get(m.card.as_str()) {
                    auras.extend(def.effects_with(Trigger::Aura).map(|e| (m.instance_id, e)));
                }
            }
            for m in &mut p.board {
                let (mut atk, mut hp) = (0, 0);
                for (src, e) in &auras {
                    let applies = *src != m.instance_id
                        && match e.target {
                            EffectTarget::AllFriendlyMinions => true,
                            EffectTarget::FriendlyMinionsOfTribe(t) => m.tribe == Some(t),
                            _ => false,
                        };
                    if applies {
                        match e.action {
                            EffectAction::BuffAttack(n) => atk += n as i32,
                            EffectAction::BuffHealth(n) => hp += n as i32,
                            _ => {}
                        }
                    }
                }
                m.aura_attack = atk;
                m.aura_health = hp;
            }
        }
    }

    /// Removes dead minions and resolves their deathrattles until the
    /// board is stable.
    pub(crate) fn death_sweep(&mut self) {
        loop {
            let mut dead: Vec<(Seat, MinionInstance)> = Vec::new();
            for seat in [self.active, self.active.other()] {
                let board = &mut self.players[seat.index()].board;
                let mut i = 0;
                while i < board.len() {
                    if board[i].is_dead() {
                        dead.push((seat, board.remove(i)));
                    } else {
                        i += 1;
                    }
                }
            }
            if dead.is_empty() {
                break;
            }
            for (seat, m) in &dead {
                self.log(Event::MinionDied {
                    seat: *seat,
                    instance_id: m.instance_id,
                    card: m.card.clone(),
                });
                if !m.token {
                    self.players[seat.index()].graveyard.push(CardInstance {
                        instance_id: m.instance_id,
                        card: m.card.clone(),
                    });
                }
            }
            self.refresh_auras();
            let cards = Arc::clone(&self.cards);
            for (seat, m) in dead.iter().filter(|(_, m)| m.has_deathrattle) {
                if let Some(def) = cards.get(m.card.as_str()) {
                    for e in def.effects_with(Trigger::Deathrattle) {
                        self.resolve_effect(*seat, None, e, None, None);
                    }
                }
            }
        }
    }

    /// Records the result once a hero has fallen or the turn limit passed.
    /// Both heroes falling together is a draw.
    pub(crate) fn check_result(&mut self) {
        if self.result.is_some() {
            return;
        }
        let dead = |s: Seat| self.players[s.index()].hero_health <= 0;
        let (outcome, reason) = match (dead(Seat::First), dead(Seat::Second)) {
            (true, true) => (Outcome::Draw, EndReason::HeroDead),
            (true, false) => (Outcome::Win(Seat::Second), EndReason::HeroDead),
            (false, true) => (Outcome::Win(Seat::First), EndReason::HeroDead),
            _ => return,
        };
        let result = GameResult {
            outcome,
            reason,
            final_turn: self.turn_number,
        };
        self.result = Some(result);
        self.log(Event::GameEnded { result });
    }
}
