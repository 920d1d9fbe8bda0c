use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use super::{ChannelId, Expr, Lifted, Program, Role, Var};
use crate::values::ValueType;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprType {
    Value(ValueType),
    /// A curried function still expecting `params`.
    Fn { params: Vec<ValueType>, ret: ValueType },
}

impl ExprType {
    pub fn as_value(&self) -> Option<&ValueType> {
        match self {
            ExprType::Value(t) => Some(t),
            ExprType::Fn { .. } => None,
        }
    }
}

impl fmt::Display for ExprType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprType::Value(t) => write!(f, "{t}"),
            ExprType::Fn { params, ret } => {
                for p in params {
                    write!(f, "{p} → ")?;
                }
                write!(f, "{ret}")
            }
        }
    }
}

/// `{R1 : τ1, …}`.
pub type RecordType = BTreeMap<Role, ValueType>;

/// Variable context Γ.
pub type TypeEnv = BTreeMap<Var, RecordType>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelEntry {
    pub chan: ChannelId,
    pub sender: Role,
    pub receiver: Role,
    pub msg_type: ValueType,
}

/// Ordered channel context Δ; each channel appears once.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChannelContext(pub Vec<ChannelEntry>);

impl ChannelContext {
    pub fn entries(&self) -> &[ChannelEntry] {
        &self.0
    }

    pub fn get(&self, c: &ChannelId) -> Option<&ChannelEntry> {
        self.0.iter().find(|e| &e.chan == c)
    }

    pub fn channels(&self) -> impl Iterator<Item = &ChannelId> {
        self.0.iter().map(|e| &e.chan)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(Var),
    #[error("variable `{var}` has no component for role {role}")]
    RoleNotInRecord { var: Var, role: Role },
    #[error("expression situated at {found} used at role {expected}")]
    RoleMismatch { expected: Role, found: Role },
    #[error("cannot apply {fun} to an argument of type {arg}")]
    ApplicationMismatch { fun: ExprType, arg: ExprType },
    #[error("constant does not inhabit its declared type {0}")]
    ConstantType(ValueType),
    #[error("vector literal item does not inhabit {0}")]
    VectorItemType(ValueType),
    #[error("channel `{0}` is used more than once")]
    ChannelReuse(ChannelId),
    #[error("role {0} is not in the program's role set")]
    UnknownRole(Role),
    #[error("variable `{0}` is bound twice")]
    VariableShadowed(Var),
    #[error("`ret` must mention at least one role")]
    EmptyRecord,
    #[error("message on `{chan}` must be a value, found {found}")]
    MessageNotValue { chan: ChannelId, found: ExprType },
    #[error("default on `{chan}` must be a value, found {found}")]
    DefaultNotValue { chan: ChannelId, found: ExprType },
    #[error("combiner on `{chan}` has type {found}, expected {expected}")]
    CombinerMismatch { chan: ChannelId, expected: ExprType, found: ExprType },
    #[error("default and combiner on `{chan}` are situated at different roles")]
    ReceiverRoleMismatch { chan: ChannelId },
    #[error("protocol bodies do not line up: output {output:?} vs input {input:?}")]
    BodyMismatch { output: RecordType, input: RecordType },
    #[error("threading function for role {role} does not accept {ty}")]
    ThreadMismatch { role: Role, ty: ValueType },
}

/// `Γ ⊢_R e : τ`.
pub fn typecheck_expr(gamma: &TypeEnv, role: &Role, e: &Expr) -> Result<ExprType, TypeError> {
    match e {
        Expr::Var { var, at } => {
            check_role(role, at)?;
            let rec = gamma.get(var).ok_or_else(|| TypeError::UnknownVariable(var.clone()))?;
            rec.get(role)
                .cloned()
                .map(ExprType::Value)
                .ok_or_else(|| TypeError::RoleNotInRecord { var: var.clone(), role: role.clone() })
        }
        Expr::Lift { term, at } => {
            check_role(role, at)?;
            match term {
                Lifted::Const(v, ty) => {
                    if ty.contains(v) {
                        Ok(ExprType::Value(ty.clone()))
                    } else {
                        Err(TypeError::ConstantType(ty.clone()))
                    }
                }
                Lifted::Fn(f) => Ok(if f.params().is_empty() {
                    ExprType::Value(f.ret().clone())
                } else {
                    ExprType::Fn { params: f.params().to_vec(), ret: f.ret().clone() }
                }),
            }
        }
        Expr::Vector { items, ty, at } => {
            check_role(role, at)?;
            // length is checked against the configuration at denotation time
            if items.iter().all(|v| ty.contains(v)) {
                Ok(ExprType::Value(ty.clone()))
            } else {
                Err(TypeError::VectorItemType(ty.clone()))
            }
        }
        Expr::App(f, a) => {
            let ft = typecheck_expr(gamma, role, f)?;
            let at = typecheck_expr(gamma, role, a)?;
            match (&ft, &at) {
                (ExprType::Fn { params, ret }, ExprType::Value(arg)) if params[0] == *arg => {
                    Ok(if params.len() == 1 {
                        ExprType::Value(ret.clone())
                    } else {
                        ExprType::Fn { params: params[1..].to_vec(), ret: ret.clone() }
                    })
                }
                _ => Err(TypeError::ApplicationMismatch { fun: ft, arg: at }),
            }
        }
    }
}

fn check_role(expected: &Role, found: &Role) -> Result<(), TypeError> {
    if expected == found {
        Ok(())
    } else {
        Err(TypeError::RoleMismatch { expected: expected.clone(), found: found.clone() })
    }
}

fn check_known(roles: &BTreeSet<Role>, r: &Role) -> Result<(), TypeError> {
    if roles.contains(r) {
        Ok(())
    } else {
        Err(TypeError::UnknownRole(r.clone()))
    }
}

/// `Δ; Γ; ℛ ⊢ p : τ`, returning `(Δ, τ)`.
pub fn typecheck_prog(
    gamma: &TypeEnv,
    roles: &BTreeSet<Role>,
    p: &Program,
) -> Result<(ChannelContext, RecordType), TypeError> {
    match p {
        Program::Ret(fields) => {
            if fields.is_empty() {
                return Err(TypeError::EmptyRecord);
            }
            let mut rec = RecordType::new();
            for (r, e) in fields {
                check_known(roles, r)?;
                match typecheck_expr(gamma, r, e)? {
                    ExprType::Value(t) => {
                        rec.insert(r.clone(), t);
                    }
                    other => {
                        return Err(TypeError::ApplicationMismatch {
                            fun: other,
                            arg: ExprType::Value(ValueType::Unit),
                        })
                    }
                }
            }
            Ok((ChannelContext::default(), rec))
        }
        Program::Let { var, bound, body } => {
            if gamma.contains_key(var) {
                return Err(TypeError::VariableShadowed(var.clone()));
            }
            let (d1, t1) = typecheck_prog(gamma, roles, bound)?;
            let mut inner = gamma.clone();
            inner.insert(var.clone(), t1);
            let (d2, t2) = typecheck_prog(&inner, roles, body)?;
            let mut delta = d1.0;
            for e in d2.0 {
                if delta.iter().any(|d| d.chan == e.chan) {
                    return Err(TypeError::ChannelReuse(e.chan));
                }
                delta.push(e);
            }
            Ok((ChannelContext(delta), t2))
        }
        Program::Comm { chan, msg, default, combine } => {
            let sender = msg.role();
            let receiver = default.role();
            if combine.role() != receiver {
                return Err(TypeError::ReceiverRoleMismatch { chan: chan.clone() });
            }
            check_known(roles, sender)?;
            check_known(roles, receiver)?;
            let msg_type = match typecheck_expr(gamma, sender, msg)? {
                ExprType::Value(t) => t,
                found => return Err(TypeError::MessageNotValue { chan: chan.clone(), found }),
            };
            let acc = match typecheck_expr(gamma, receiver, default)? {
                ExprType::Value(t) => t,
                found => return Err(TypeError::DefaultNotValue { chan: chan.clone(), found }),
            };
            let expected = ExprType::Fn { params: vec![acc.clone(), msg_type.clone()], ret: acc.clone() };
            let found = typecheck_expr(gamma, receiver, combine)?;
            if found != expected {
                return Err(TypeError::CombinerMismatch { chan: chan.clone(), expected, found });
            }
            let entry = ChannelEntry {
                chan: chan.clone(),
                sender: sender.clone(),
                receiver: receiver.clone(),
                msg_type,
            };
            let mut rec = RecordType::new();
            rec.insert(receiver.clone(), acc);
            Ok((ChannelContext(vec![entry]), rec))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::values::{PureFn, Registry, Value, TOP};
    use alloc::sync::Arc;

    fn roles() -> BTreeSet<Role> {
        [Role::new("L"), Role::new("R")].into_iter().collect()
    }

    fn gamma(entries: &[(&str, &str, ValueType)]) -> TypeEnv {
        let mut g = TypeEnv::new();
        for (x, r, t) in entries {
            g.entry(Var::new(x)).or_default().insert(Role::new(r), t.clone());
        }
        g
    }

    fn counter() -> crate::values::FnRef {
        let mut reg = Registry::new();
        reg.register(PureFn::new(
            "count",
            vec![ValueType::nat(4), ValueType::Bool],
            ValueType::nat(4),
            |a| Value::Nat(a[0].nat_arg() + a[1].bool_arg() as u32),
        ))
        .unwrap()
    }

    #[test]
    fn var_lift_and_role_errors() {
        let r = Role::new("R");
        let l = Role::new("L");
        let x = Var::new("x");
        let g = gamma(&[("x", "R", ValueType::Bool)]);
        assert_eq!(typecheck_expr(&g, &r, &Expr::var(&x, &r)), Ok(ExprType::Value(ValueType::Bool)));
        assert_eq!(
            typecheck_expr(&TypeEnv::new(), &r, &Expr::constant(TOP, ValueType::Bool, &r)),
            Ok(ExprType::Value(ValueType::Bool))
        );
        assert_eq!(
            typecheck_expr(&g, &l, &Expr::var(&x, &l)),
            Err(TypeError::RoleNotInRecord { var: x.clone(), role: l.clone() })
        );
        assert_eq!(
            typecheck_expr(&g, &l, &Expr::var(&x, &r)),
            Err(TypeError::RoleMismatch { expected: l, found: r.clone() })
        );
        assert_eq!(
            typecheck_expr(&g, &r, &Expr::var(&Var::new("y"), &r)),
            Err(TypeError::UnknownVariable(Var::new("y")))
        );
    }

    #[test]
    fn application_checks_argument_type() {
        let r = Role::new("R");
        let f = counter();
        let ok = Expr::func(&f, &r).app(Expr::constant(Value::Nat(0), ValueType::nat(4), &r));
        assert_eq!(
            typecheck_expr(&TypeEnv::new(), &r, &ok),
            Ok(ExprType::Fn { params: vec![ValueType::Bool], ret: ValueType::nat(4) })
        );
        let bad = Expr::func(&f, &r).app(Expr::constant(TOP, ValueType::Bool, &r));
        assert!(matches!(
            typecheck_expr(&TypeEnv::new(), &r, &bad),
            Err(TypeError::ApplicationMismatch { .. })
        ));
    }

    #[test]
    fn ret_has_empty_context() {
        let l = Role::new("L");
        let p = Program::ret([(l.clone(), Expr::constant(Value::Unit, ValueType::Unit, &l))]);
        let (d, t) = typecheck_prog(&TypeEnv::new(), &roles(), &p).unwrap();
        assert!(d.is_empty());
        assert_eq!(t, [(l, ValueType::Unit)].into_iter().collect());
    }

    #[test]
    fn channel_reuse_is_rejected() {
        let (l, r) = (Role::new("L"), Role::new("R"));
        let f = counter();
        let c = ChannelId::new("c");
        let comm = || {
            Program::comm(
                &c,
                Expr::constant(TOP, ValueType::Bool, &r),
                Expr::constant(Value::Nat(0), ValueType::nat(4), &l),
                Expr::func(&f, &l),
            )
        };
        let (d, _) = typecheck_prog(&TypeEnv::new(), &roles(), &comm()).unwrap();
        assert_eq!(d.len(), 1);
        let p = Program::let_(
            &Var::new("x"),
            comm(),
            Program::let_(&Var::new("y"), comm(), Program::ret([(l.clone(), Expr::var(&Var::new("y"), &l))])),
        );
        assert_eq!(typecheck_prog(&TypeEnv::new(), &roles(), &p), Err(TypeError::ChannelReuse(c)));
    }

    #[test]
    fn shadowing_is_rejected() {
        let l = Role::new("L");
        let x = Var::new("x");
        let unit = || Program::ret([(l.clone(), Expr::constant(Value::Unit, ValueType::Unit, &l))]);
        let p = Program::Let {
            var: x.clone(),
            bound: Arc::new(unit()),
            body: Arc::new(Program::let_(&x, unit(), unit())),
        };
        assert_eq!(typecheck_prog(&TypeEnv::new(), &roles(), &p), Err(TypeError::VariableShadowed(x)));
    }

    #[test]
    fn combiner_shape_is_checked() {
        let (l, r) = (Role::new("L"), Role::new("R"));
        let f = counter();
        let p = Program::comm(
            &ChannelId::new("c"),
            Expr::constant(Value::Nat(1), ValueType::nat(4), &r),
            Expr::constant(Value::Nat(0), ValueType::nat(4), &l),
            Expr::func(&f, &l),
        );
        assert!(matches!(
            typecheck_prog(&TypeEnv::new(), &roles(), &p),
            Err(TypeError::CombinerMismatch { .. })
        ));
        let unknown = Program::comm(
            &ChannelId::new("c"),
            Expr::constant(TOP, ValueType::Bool, &Role::new("Z")),
            Expr::constant(Value::Nat(0), ValueType::nat(4), &l),
            Expr::func(&f, &l),
        );
        assert_eq!(
            typecheck_prog(&TypeEnv::new(), &roles(), &unknown),
            Err(TypeError::UnknownRole(Role::new("Z")))
        );
    }
}
