//! The JSON card-file format.
//!
//! ```json
//! {"version": "1", "cards": [
//!   {"id": "reef_skulker", "name": "Reef Skulker", "class": "Neutral",
//!    "kind": "Minion", "cost": 1, "attack": 2, "health": 1, "tribe": "Murloc",
//!    "effects": []}
//! ]}
//! ```
//!
//! Unknown fields are rejected at every level. Minions carry `attack` and
//! `health`, weapons `attack` and `durability`, spells and secrets neither.
//! `taunt` is an optional minion flag.

use serde::{Deserialize, Serialize};

use super::{
    CardClass, CardDefinition, CardError, CardId, CardKind, CardSet, EffectAction, EffectScript, EffectTarget,
    SecretCondition, Tribe, Trigger,
};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CardFile {
    version: String,
    cards: Vec<CardObject>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CardObject {
    id: String,
    name: String,
    class: String,
    kind: String,
    cost: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attack: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    health: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    durability: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tribe: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    taunt: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uncollectible: Option<bool>,
    effects: Vec<EffectObject>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct EffectObject {
    trigger: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    condition: Option<String>,
    action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amount: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    token: Option<String>,
    target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tribe_arg: Option<String>,
}

pub(crate) fn json_error(err: serde_json::Error) -> CardError {
    use serde_json::error::Category;
    match err.classify() {
        Category::Syntax | Category::Eof | Category::Io => CardError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        },
        Category::Data => CardError::schema("document", err.to_string()),
    }
}

/// Parses a card file. Rejects malformed JSON, duplicate ids and any
/// structural violation of the card model.
pub fn load_card_set(document: &[u8]) -> Result<CardSet, CardError> {
    let text = std::str::from_utf8(document).map_err(|e| CardError::Parse {
        line: 0,
        column: e.valid_up_to(),
        message: "document is not valid UTF-8".into(),
    })?;
    let file: CardFile = serde_json::from_str(text).map_err(json_error)?;
    let cards = file
        .cards
        .into_iter()
        .map(card_from_wire)
        .collect::<Result<Vec<_>, _>>()?;
    CardSet::new(file.version, cards)
}

fn count(ctx: &str, field: &str, v: i64) -> Result<u32, CardError> {
    u32::try_from(v).map_err(|_| CardError::schema(ctx, format!("`{field}` must be a non-negative integer")))
}

fn parse<T: std::str::FromStr<Err = String>>(ctx: &str, s: &str) -> Result<T, CardError> {
    s.parse().map_err(|m| CardError::schema(ctx, m))
}

fn card_from_wire(obj: CardObject) -> Result<CardDefinition, CardError> {
    let ctx = format!("card `{}`", obj.id);
    let kind: CardKind = parse(&ctx, &obj.kind)?;
    let class: CardClass = parse(&ctx, &obj.class)?;
    let cost = count(&ctx, "cost", obj.cost)?;
    let forbid = |field: &str, present: bool| {
        if present {
            Err(CardError::schema(&ctx, format!("`{field}` not allowed on a {kind}")))
        } else {
            Ok(())
        }
    };
    let require = |field: &str, v: Option<i64>| {
        v.ok_or_else(|| CardError::schema(&ctx, format!("a {kind} needs `{field}`")))
            .and_then(|v| count(&ctx, field, v))
    };
    let (attack, health_or_durability) = match kind {
        CardKind::Minion => {
            forbid("durability", obj.durability.is_some())?;
            (require("attack", obj.attack)?, require("health", obj.health)?)
        }
        CardKind::Weapon => {
            forbid("health", obj.health.is_some())?;
            (require("attack", obj.attack)?, require("durability", obj.durability)?)
        }
        CardKind::Spell | CardKind::Secret => {
            forbid("attack", obj.attack.is_some())?;
            forbid("health", obj.health.is_some())?;
            forbid("durability", obj.durability.is_some())?;
            (0, 0)
        }
    };
    if kind != CardKind::Minion {
        forbid("tribe", obj.tribe.is_some())?;
        forbid("taunt", obj.taunt.is_some())?;
    }
    let tribe = obj.tribe.as_deref().map(|t| parse::<Tribe>(&ctx, t)).transpose()?;
    let effects = obj
        .effects
        .into_iter()
        .map(|e| effect_from_wire(&ctx, e))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CardDefinition {
        id: CardId::new(&obj.id),
        name: obj.name,
        class,
        kind,
        cost,
        attack,
        health_or_durability,
        tribe,
        taunt: obj.taunt.unwrap_or(false),
        uncollectible: obj.uncollectible.unwrap_or(false),
        effects,
    })
}

fn effect_from_wire(ctx: &str, e: EffectObject) -> Result<EffectScript, CardError> {
    let trigger = match (e.trigger.as_str(), &e.condition) {
        ("SecretTrigger", Some(c)) => Trigger::SecretTrigger(parse::<SecretCondition>(ctx, c)?),
        ("SecretTrigger", None) => return Err(CardError::schema(ctx, "SecretTrigger needs a `condition`")),
        (_, Some(_)) => return Err(CardError::schema(ctx, "`condition` only applies to SecretTrigger")),
        ("Battlecry", None) => Trigger::Battlecry,
        ("Deathrattle", None) => Trigger::Deathrattle,
        ("OnCast", None) => Trigger::OnCast,
        ("Aura", None) => Trigger::Aura,
        (other, None) => return Err(CardError::schema(ctx, format!("unknown trigger `{other}`"))),
    };
    let needs_amount = matches!(
        e.action.as_str(),
        "Damage" | "Heal" | "BuffAttack" | "BuffHealth" | "DrawCards" | "GainMana"
    );
    let amount = match (needs_amount, e.amount) {
        (true, Some(a)) => count(ctx, "amount", a)?,
        (true, None) => return Err(CardError::schema(ctx, format!("{} needs `amount`", e.action))),
        (false, Some(_)) => return Err(CardError::schema(ctx, format!("{} takes no `amount`", e.action))),
        (false, None) => 0,
    };
    if e.action != "SummonToken" && e.token.is_some() {
        return Err(CardError::schema(ctx, "`token` only applies to SummonToken"));
    }
    let action = match e.action.as_str() {
        "Damage" => EffectAction::Damage(amount),
        "Heal" => EffectAction::Heal(amount),
        "BuffAttack" => EffectAction::BuffAttack(amount),
        "BuffHealth" => EffectAction::BuffHealth(amount),
        "DrawCards" => EffectAction::DrawCards(amount),
        "GainMana" => EffectAction::GainMana(amount),
        "DestroyMinion" => EffectAction::DestroyMinion,
        "DestroyWeapon" => EffectAction::DestroyWeapon,
        "SummonToken" => match &e.token {
            Some(t) => EffectAction::SummonToken(CardId::new(t)),
            None => return Err(CardError::schema(ctx, "SummonToken needs `token`")),
        },
        other => return Err(CardError::schema(ctx, format!("unknown action `{other}`"))),
    };
    if e.target != "FriendlyMinionsOfTribe" && e.tribe_arg.is_some() {
        return Err(CardError::schema(
            ctx,
            "`tribeArg` only applies to FriendlyMinionsOfTribe",
        ));
    }
    let target = match e.target.as_str() {
        "ChosenTarget" => EffectTarget::ChosenTarget,
        "Self" => EffectTarget::SelfMinion,
        "OwnHero" => EffectTarget::OwnHero,
        "EnemyHero" => EffectTarget::EnemyHero,
        "AllEnemyMinions" => EffectTarget::AllEnemyMinions,
        "AllFriendlyMinions" => EffectTarget::AllFriendlyMinions,
        "RandomEnemyMinion" => EffectTarget::RandomEnemyMinion,
        "TriggeringEntity" => EffectTarget::TriggeringEntity,
        "FriendlyMinionsOfTribe" => match &e.tribe_arg {
            Some(t) => EffectTarget::FriendlyMinionsOfTribe(parse(ctx, t)?),
            None => return Err(CardError::schema(ctx, "FriendlyMinionsOfTribe needs `tribeArg`")),
        },
        other => return Err(CardError::schema(ctx, format!("unknown target `{other}`"))),
    };
    Ok(EffectScript {
        trigger,
        action,
        target,
    })
}

fn card_to_wire(c: &CardDefinition) -> CardObject {
    let stats = |v: u32| Some(i64::from(v));
    let (attack, health, durability) = match c.kind {
        CardKind::Minion => (stats(c.attack), stats(c.health_or_durability), None),
        CardKind::Weapon => (stats(c.attack), None, stats(c.health_or_durability)),
        CardKind::Spell | CardKind::Secret => (None, None, None),
    };
    CardObject {
        id: c.id.to_string(),
        name: c.name.clone(),
        class: c.class.to_string(),
        kind: c.kind.to_string(),
        cost: i64::from(c.cost),
        attack,
        health,
        durability,
        tribe: c.tribe.map(|t| t.to_string()),
        taunt: c.taunt.then_some(true),
        uncollectible: c.uncollectible.then_some(true),
        effects: c.effects.iter().map(effect_to_wire).collect(),
    }
}

fn effect_to_wire(e: &EffectScript) -> EffectObject {
    let (trigger, condition) = match e.trigger {
        Trigger::Battlecry => ("Battlecry", None),
        Trigger::Deathrattle => ("Deathrattle", None),
        Trigger::OnCast => ("OnCast", None),
        Trigger::Aura => ("Aura", None),
        Trigger::SecretTrigger(c) => ("SecretTrigger", Some(c.to_string())),
    };
    let token = match &e.action {
        EffectAction::SummonToken(t) => Some(t.to_string()),
        _ => None,
    };
    let tribe_arg = match e.target {
        EffectTarget::FriendlyMinionsOfTribe(t) => Some(t.to_string()),
        _ => None,
    };
    EffectObject {
        trigger: trigger.to_string(),
        condition,
        action: e.action.name().to_string(),
        amount: e.action.amount().map(i64::from),
        token,
        target: e.target.name().to_string(),
        tribe_arg,
    }
}

pub(crate) fn serialize_card_set(set: &CardSet) -> String {
    let file = CardFile {
        version: set.version().to_string(),
        cards: set.iter().map(card_to_wire).collect(),
    };
    serde_json::to_string_pretty(&file).expect("card file serializes")
}
