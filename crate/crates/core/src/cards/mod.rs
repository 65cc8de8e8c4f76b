//! Card data model, the closed effect DSL, card-file loading and deck rules.

mod builtin;
mod deck;
mod format;

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use builtin::{builtin_card_set, builtin_deck, builtin_decks, PREMADE_DECK_NAMES};
pub use deck::{load_deck, validate_deck, DeckSpec, DeckViolation, COPY_LIMIT, DECK_SIZE};
pub use format::load_card_set;

/// Card id of the 1/1 minion summoned by the recruit hero power.
pub const RECRUIT_TOKEN: &str = "recruit";

/// Mana cost shared by every hero power.
pub const HERO_POWER_COST: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CardError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate card id `{0}`")]
    DuplicateId(String),
    #[error("schema error in {context}: {message}")]
    Schema { context: String, message: String },
}

impl CardError {
    pub(crate) fn schema(context: impl Into<String>, message: impl Into<String>) -> Self {
        CardError::Schema {
            context: context.into(),
            message: message.into(),
        }
    }
}

/// Interned card identifier. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CardId(Arc<str>);

impl CardId {
    pub fn new(id: &str) -> Self {
        CardId(Arc::from(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for CardId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for CardId {
    fn from(s: &str) -> Self {
        CardId::new(s)
    }
}

impl fmt::Debug for CardId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for CardId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

macro_rules! string_enum {
    ($(#[$meta:meta])* pub enum $name:ident { $($variant:ident),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => stringify!($variant)),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $(stringify!($variant) => Ok($name::$variant),)+
                    other => Err(format!("unknown {} `{}`", stringify!($name), other)),
                }
            }
        }
    };
}

string_enum! {
    /// The nine playable hero classes.
    pub enum HeroClass {
        Druid,
        Hunter,
        Mage,
        Paladin,
        Priest,
        Rogue,
        Shaman,
        Warlock,
        Warrior,
    }
}

string_enum! {
    pub enum CardKind {
        Minion,
        Spell,
        Secret,
        Weapon,
    }
}

string_enum! {
    pub enum Tribe {
        Murloc,
        Beast,
        Demon,
        Dragon,
        Elemental,
        Mech,
        Pirate,
        Totem,
    }
}

string_enum! {
    pub enum SecretCondition {
        EnemyMinionAttacks,
        EnemyPlaysMinion,
        EnemySpellCast,
    }
}

string_enum! {
    pub enum Archetype {
        Aggro,
        MidRange,
        Control,
    }
}

/// Owning class of a card: one of the nine classes or class-free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CardClass {
    Neutral,
    Hero(HeroClass),
}

impl CardClass {
    pub fn allows(self, hero: HeroClass) -> bool {
        match self {
            CardClass::Neutral => true,
            CardClass::Hero(c) => c == hero,
        }
    }
}

impl fmt::Display for CardClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CardClass::Neutral => f.write_str("Neutral"),
            CardClass::Hero(c) => f.write_str(c.as_str()),
        }
    }
}

impl FromStr for CardClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "Neutral" {
            Ok(CardClass::Neutral)
        } else {
            s.parse().map(CardClass::Hero)
        }
    }
}

impl TryFrom<String> for CardClass {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<CardClass> for String {
    fn from(c: CardClass) -> String {
        c.to_string()
    }
}

/// Fixed per-class hero power. All cost [`HERO_POWER_COST`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeroPower {
    /// Deal 1 damage to a chosen character.
    Ping,
    /// Restore 2 health to a chosen character.
    Mend,
    /// Summon a 1/1 [`RECRUIT_TOKEN`].
    Recruit,
}

impl HeroPower {
    pub fn for_class(class: HeroClass) -> HeroPower {
        match class {
            HeroClass::Mage | HeroClass::Hunter | HeroClass::Rogue => HeroPower::Ping,
            HeroClass::Priest | HeroClass::Druid | HeroClass::Shaman => HeroPower::Mend,
            HeroClass::Paladin | HeroClass::Warrior | HeroClass::Warlock => HeroPower::Recruit,
        }
    }

    pub fn needs_target(self) -> bool {
        !matches!(self, HeroPower::Recruit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trigger {
    Battlecry,
    Deathrattle,
    OnCast,
    Aura,
    SecretTrigger(SecretCondition),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EffectAction {
    Damage(u32),
    Heal(u32),
    BuffAttack(u32),
    BuffHealth(u32),
    DrawCards(u32),
    SummonToken(CardId),
    DestroyMinion,
    DestroyWeapon,
    GainMana(u32),
}

impl EffectAction {
    pub fn name(&self) -> &'static str {
        match self {
            EffectAction::Damage(_) => "Damage",
            EffectAction::Heal(_) => "Heal",
            EffectAction::BuffAttack(_) => "BuffAttack",
            EffectAction::BuffHealth(_) => "BuffHealth",
            EffectAction::DrawCards(_) => "DrawCards",
            EffectAction::SummonToken(_) => "SummonToken",
            EffectAction::DestroyMinion => "DestroyMinion",
            EffectAction::DestroyWeapon => "DestroyWeapon",
            EffectAction::GainMana(_) => "GainMana",
        }
    }

    pub fn amount(&self) -> Option<u32> {
        match *self {
            EffectAction::Damage(n)
            | EffectAction::Heal(n)
            | EffectAction::BuffAttack(n)
            | EffectAction::BuffHealth(n)
            | EffectAction::DrawCards(n)
            | EffectAction::GainMana(n) => Some(n),
            _ => None,
        }
    }

    /// Actions that only make sense on minions.
    pub fn minion_only(&self) -> bool {
        matches!(
            self,
            EffectAction::BuffAttack(_) | EffectAction::BuffHealth(_) | EffectAction::DestroyMinion
        )
    }

    /// Actions that operate on a player side rather than a character.
    pub fn player_scoped(&self) -> bool {
        matches!(
            self,
            EffectAction::DrawCards(_)
                | EffectAction::SummonToken(_)
                | EffectAction::DestroyWeapon
                | EffectAction::GainMana(_)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EffectTarget {
    ChosenTarget,
    /// The minion carrying the effect.
    #[serde(rename = "Self")]
    SelfMinion,
    OwnHero,
    EnemyHero,
    AllEnemyMinions,
    AllFriendlyMinions,
    RandomEnemyMinion,
    FriendlyMinionsOfTribe(Tribe),
    TriggeringEntity,
}

impl EffectTarget {
    pub fn name(self) -> &'static str {
        match self {
            EffectTarget::ChosenTarget => "ChosenTarget",
            EffectTarget::SelfMinion => "Self",
            EffectTarget::OwnHero => "OwnHero",
            EffectTarget::EnemyHero => "EnemyHero",
            EffectTarget::AllEnemyMinions => "AllEnemyMinions",
            EffectTarget::AllFriendlyMinions => "AllFriendlyMinions",
            EffectTarget::RandomEnemyMinion => "RandomEnemyMinion",
            EffectTarget::FriendlyMinionsOfTribe(_) => "FriendlyMinionsOfTribe",
            EffectTarget::TriggeringEntity => "TriggeringEntity",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectScript {
    pub trigger: Trigger,
    pub action: EffectAction,
    pub target: EffectTarget,
}

impl EffectScript {
    pub fn new(trigger: Trigger, action: EffectAction, target: EffectTarget) -> Self {
        EffectScript {
            trigger,
            action,
            target,
        }
    }

    /// Checks the structural rules of the DSL that do not depend on the
    /// owning card.
    pub fn check_structure(&self) -> Result<(), String> {
        use EffectTarget as T;
        if let Some(0) = self.action.amount() {
            return Err(format!("{} needs a positive amount", self.action.name()));
        }
        match self.trigger {
            Trigger::Aura => {
                if !matches!(self.target, T::FriendlyMinionsOfTribe(_) | T::AllFriendlyMinions) {
                    return Err("auras may only target friendly minions".into());
                }
                if !matches!(self.action, EffectAction::BuffAttack(_) | EffectAction::BuffHealth(_)) {
                    return Err("auras may only use BuffAttack or BuffHealth".into());
                }
            }
            Trigger::SecretTrigger(cond) => {
                if self.target == T::TriggeringEntity && cond == SecretCondition::EnemySpellCast {
                    return Err("EnemySpellCast secrets have no triggering entity".into());
                }
                if matches!(self.target, T::ChosenTarget | T::SelfMinion) {
                    return Err(format!("secrets cannot target {}", self.target.name()));
                }
            }
            Trigger::Deathrattle => {
                if matches!(self.target, T::ChosenTarget | T::SelfMinion | T::TriggeringEntity) {
                    return Err(format!("deathrattles cannot target {}", self.target.name()));
                }
            }
            Trigger::Battlecry | Trigger::OnCast => {
                if self.target == T::TriggeringEntity {
                    return Err("only secrets have a triggering entity".into());
                }
            }
        }
        if self.action.player_scoped() && !matches!(self.target, T::OwnHero | T::EnemyHero) {
            return Err(format!("{} must target OwnHero or EnemyHero", self.action.name()));
        }
        if self.action.minion_only() && matches!(self.target, T::OwnHero | T::EnemyHero) {
            return Err(format!("{} cannot target a hero", self.action.name()));
        }
        Ok(())
    }
}

/// Static card data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardDefinition {
    pub id: CardId,
    pub name: String,
    pub class: CardClass,
    pub kind: CardKind,
    pub cost: u32,
    /// Minion or weapon attack; 0 for spells and secrets.
    pub attack: u32,
    /// Minion health or weapon durability; 0 for spells and secrets.
    pub health_or_durability: u32,
    pub tribe: Option<Tribe>,
    /// Enemy attacks must target taunt minions first.
    pub taunt: bool,
    /// Tokens and other cards that may not appear in decks.
    pub uncollectible: bool,
    pub effects: Vec<EffectScript>,
}

impl CardDefinition {
    pub fn effects_with(&self, trigger: Trigger) -> impl Iterator<Item = &EffectScript> {
        self.effects.iter().filter(move |e| e.trigger == trigger)
    }

    pub fn has_trigger(&self, pred: impl Fn(Trigger) -> bool) -> bool {
        self.effects.iter().any(|e| pred(e.trigger))
    }

    pub fn secret_condition(&self) -> Option<SecretCondition> {
        self.effects.iter().find_map(|e| match e.trigger {
            Trigger::SecretTrigger(c) => Some(c),
            _ => None,
        })
    }

    /// What a chosen target must be for this card to be played, if anything.
    pub fn chosen_target_kind(&self) -> Option<ChosenKind> {
        let mut kind = None;
        for e in &self.effects {
            if e.target == EffectTarget::ChosenTarget && matches!(e.trigger, Trigger::Battlecry | Trigger::OnCast) {
                if e.action.minion_only() {
                    kind = Some(ChosenKind::Minion);
                } else if kind.is_none() {
                    kind = Some(ChosenKind::Character);
                }
            }
        }
        kind
    }

    /// Checks every per-card invariant of the data model.
    pub fn check(&self) -> Result<(), CardError> {
        let ctx = || format!("card `{}`", self.id);
        if self.id.as_str().is_empty() {
            return Err(CardError::schema("card", "empty id"));
        }
        match self.kind {
            CardKind::Minion | CardKind::Weapon => {
                if self.health_or_durability == 0 {
                    return Err(CardError::schema(
                        ctx(),
                        "minions and weapons need health/durability >= 1",
                    ));
                }
            }
            CardKind::Spell | CardKind::Secret => {
                if self.attack != 0 || self.health_or_durability != 0 {
                    return Err(CardError::schema(ctx(), "spells carry no attack or health"));
                }
            }
        }
        if self.kind != CardKind::Minion && (self.tribe.is_some() || self.taunt) {
            return Err(CardError::schema(ctx(), "only minions have a tribe or taunt"));
        }
        if self.kind == CardKind::Weapon && self.attack == 0 {
            return Err(CardError::schema(ctx(), "weapons need attack >= 1"));
        }
        let secret_effects = self
            .effects
            .iter()
            .filter(|e| matches!(e.trigger, Trigger::SecretTrigger(_)))
            .count();
        if self.kind == CardKind::Secret && (secret_effects != 1 || self.effects.len() != 1) {
            return Err(CardError::schema(
                ctx(),
                "a secret needs exactly one effect with a SecretTrigger",
            ));
        }
        for e in &self.effects {
            e.check_structure().map_err(|m| CardError::schema(ctx(), m))?;
            let allowed = match (self.kind, e.trigger) {
                (CardKind::Minion, Trigger::Battlecry | Trigger::Deathrattle | Trigger::Aura) => true,
                (CardKind::Spell, Trigger::OnCast) => true,
                (CardKind::Secret, Trigger::SecretTrigger(_)) => true,
                (CardKind::Weapon, Trigger::Battlecry) => true,
                _ => false,
            };
            if !allowed {
                return Err(CardError::schema(
                    ctx(),
                    format!("trigger {:?} not allowed on a {}", e.trigger, self.kind),
                ));
            }
            if e.target == EffectTarget::SelfMinion && self.kind != CardKind::Minion {
                return Err(CardError::schema(ctx(), "only minions can target Self"));
            }
        }
        Ok(())
    }
}

/// Shape of a target picked by the player when a card is played.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChosenKind {
    Character,
    Minion,
}

/// An id-indexed, ordered collection of card definitions.
#[derive(Clone, Debug)]
pub struct CardSet {
    version: String,
    cards: Vec<CardDefinition>,
    index: HashMap<CardId, usize>,
}

impl PartialEq for CardSet {
    fn eq(&self, other: &Self) -> bool {
        self.version == other.version && self.cards == other.cards
    }
}

impl Eq for CardSet {}

impl CardSet {
    /// Builds a set, enforcing unique ids, per-card invariants and
    /// token references.
    pub fn new(version: impl Into<String>, cards: Vec<CardDefinition>) -> Result<CardSet, CardError> {
        let mut index = HashMap::with_capacity(cards.len());
        for (i, c) in cards.iter().enumerate() {
            if index.insert(c.id.clone(), i).is_some() {
                return Err(CardError::DuplicateId(c.id.to_string()));
            }
        }
        let set = CardSet {
            version: version.into(),
            cards,
            index,
        };
        for c in &set.cards {
            c.check()?;
            for e in &c.effects {
                if let EffectAction::SummonToken(token) = &e.action {
                    match set.get(token.as_str()) {
                        Some(t) if t.kind == CardKind::Minion => {}
                        Some(_) => {
                            return Err(CardError::schema(
                                format!("card `{}`", c.id),
                                format!("token `{token}` is not a minion"),
                            ))
                        }
                        None => {
                            return Err(CardError::schema(
                                format!("card `{}`", c.id),
                                format!("unknown token `{token}`"),
                            ))
                        }
                    }
                }
            }
        }
        Ok(set)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn get(&self, id: &str) -> Option<&CardDefinition> {
        self.index.get(id).map(|&i| &self.cards[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CardDefinition> {
        self.cards.iter()
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    /// Collectible cards a deck of `class` may contain, in set order.
    pub fn pool_for(&self, class: HeroClass) -> impl Iterator<Item = &CardDefinition> {
        self.cards
            .iter()
            .filter(move |c| !c.uncollectible && c.class.allows(class))
    }

    /// Serializes to the card-file JSON format.
    pub fn to_json(&self) -> String {
        format::serialize_card_set(self)
    }
}
