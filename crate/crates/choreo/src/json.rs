//! Canonical JSON encodings of values, records, labels and configurations.
//!
//! Objects are `serde_json` maps, which keep keys sorted; sets are emitted in
//! their `Ord` order. Equal inputs therefore always render to equal bytes.

use choreo_core::channel::ChannelState;
use choreo_core::denote::{Config, DistRecord, NodeId, OutputSet};
use choreo_core::global::GlobalLabel;
use choreo_core::hll::{ChannelContext, ChannelId, Role};
use choreo_core::values::Value;
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unknown value tag `{0}`")]
    UnknownTag(String),
    #[error("unknown label kind `{0}`")]
    UnknownKind(String),
}

pub fn value(v: &Value) -> Json {
    match v {
        Value::Unit => json!({"t": "unit"}),
        Value::Bool(b) => json!({"t": "bool", "v": b}),
        Value::Nat(n) => json!({"t": "nat", "v": n}),
        Value::Opt(None) => json!({"t": "opt", "v": null}),
        Value::Opt(Some(x)) => json!({"t": "opt", "v": value(x)}),
        Value::Pair(l, r) => json!({"t": "pair", "v": [value(l), value(r)]}),
    }
}

pub fn decode_value(j: &Json) -> Result<Value, DecodeError> {
    let tag = j.get("t").and_then(Json::as_str).ok_or(DecodeError::Expected("value tag"))?;
    let v = j.get("v");
    Ok(match tag {
        "unit" => Value::Unit,
        "bool" => Value::Bool(v.and_then(Json::as_bool).ok_or(DecodeError::Expected("bool"))?),
        "nat" => {
            let n = v.and_then(Json::as_u64).ok_or(DecodeError::Expected("nat"))?;
            Value::Nat(u32::try_from(n).map_err(|_| DecodeError::Expected("nat below 2^32"))?)
        }
        "opt" => match v {
            None | Some(Json::Null) => Value::none(),
            Some(x) => Value::some(decode_value(x)?),
        },
        "pair" => {
            let a = v.and_then(Json::as_array).filter(|a| a.len() == 2).ok_or(DecodeError::Expected("pair"))?;
            Value::pair(decode_value(&a[0])?, decode_value(&a[1])?)
        }
        other => return Err(DecodeError::UnknownTag(other.into())),
    })
}

pub fn values(vs: &[Value]) -> Json {
    Json::Array(vs.iter().map(value).collect())
}

fn decode_values(j: &Json) -> Result<Vec<Value>, DecodeError> {
    j.as_array().ok_or(DecodeError::Expected("array of values"))?.iter().map(decode_value).collect()
}

pub fn record(r: &DistRecord) -> Json {
    Json::Object(r.iter().map(|(role, vs)| (role.to_string(), values(vs))).collect())
}

pub fn decode_record(j: &Json) -> Result<DistRecord, DecodeError> {
    j.as_object()
        .ok_or(DecodeError::Expected("record"))?
        .iter()
        .map(|(k, v)| Ok((Role::new(k), decode_values(v)?)))
        .collect()
}

pub fn output_set(s: &OutputSet) -> Json {
    Json::Array(s.iter().map(record).collect())
}

pub fn config(cfg: &Config) -> Json {
    Json::Object(
        cfg.roles()
            .map(|(r, c)| (r.to_string(), json!({"n": c.n, "f": c.f, "b": c.b})))
            .collect::<Map<_, _>>(),
    )
}

pub fn delta(d: &ChannelContext) -> Json {
    Json::Array(
        d.entries()
            .iter()
            .map(|e| {
                json!({
                    "chan": e.chan.to_string(),
                    "sender": e.sender.to_string(),
                    "receiver": e.receiver.to_string(),
                    "msg_type": e.msg_type.to_string(),
                })
            })
            .collect(),
    )
}

pub fn label(l: &GlobalLabel) -> Json {
    match l {
        GlobalLabel::Send { node, chan, v } => {
            json!({"kind": "send", "node": node.to_string(), "chan": chan.to_string(), "v": value(v)})
        }
        GlobalLabel::Byz { chan, from, to, v } => json!({
            "kind": "byz",
            "chan": chan.to_string(),
            "from": from.to_string(),
            "to": to.to_string(),
            "v": value(v),
        }),
        GlobalLabel::Receive { node, chan, msgs } => {
            json!({"kind": "receive", "node": node.to_string(), "chan": chan.to_string(), "msgs": values(msgs)})
        }
    }
}

pub fn labels(ls: &[GlobalLabel]) -> Json {
    Json::Array(ls.iter().map(label).collect())
}

fn node_field(j: &Json, key: &'static str) -> Result<NodeId, DecodeError> {
    j.get(key).and_then(Json::as_str).and_then(NodeId::parse).ok_or(DecodeError::Expected("node id like R/0"))
}

pub fn decode_label(j: &Json) -> Result<GlobalLabel, DecodeError> {
    let kind = j.get("kind").and_then(Json::as_str).ok_or(DecodeError::Expected("label kind"))?;
    let chan = j
        .get("chan")
        .and_then(Json::as_str)
        .and_then(ChannelId::parse)
        .ok_or(DecodeError::Expected("channel id like c#0"))?;
    let v = || j.get("v").ok_or(DecodeError::Expected("payload")).and_then(decode_value);
    Ok(match kind {
        "send" => GlobalLabel::Send { node: node_field(j, "node")?, chan, v: v()? },
        "byz" => GlobalLabel::Byz { chan, from: node_field(j, "from")?, to: node_field(j, "to")?, v: v()? },
        "receive" => GlobalLabel::Receive {
            node: node_field(j, "node")?,
            chan,
            msgs: decode_values(j.get("msgs").ok_or(DecodeError::Expected("msgs"))?)?,
        },
        other => return Err(DecodeError::UnknownKind(other.into())),
    })
}

pub fn channel_state(s: &ChannelState) -> Json {
    let ids = |set: &std::collections::BTreeSet<NodeId>| Json::Array(set.iter().map(|n| json!(n.to_string())).collect());
    json!({
        "fs": ids(&s.fs),
        "fr": ids(&s.fr),
        "fb": Json::Object(s.fb.iter().map(|(k, v)| (k.to_string(), ids(v))).collect()),
        "m": Json::Object(s.m.iter().map(|(k, v)| (k.to_string(), values(v))).collect()),
        "ms": values(&s.ms),
        "mr": Json::Object(s.mr.iter().map(|(k, v)| (k.to_string(), values(v))).collect()),
    })
}

/// Compact single-line rendering.
pub fn to_line(j: &Json) -> String {
    serde_json::to_string(j).expect("JSON values always serialize")
}
