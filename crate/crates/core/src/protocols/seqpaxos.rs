use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{def, fn_name, leader, replica};
use crate::denote::{Config, ConfigError};
use crate::hll::{iter, ChannelId, Expr, Program, ProtocolBody, RecordType, Role, TypeError, Var};
use crate::values::{PureFn, Registry, Value, ValueType};

/// Single-decree Paxos with a fixed leader: collect, propose, count.
///
/// Values are `0..values`, rounds `0..=max_round` (addition saturates).
/// `default(r)` is `defaults[r % defaults.len()]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqPaxos {
    pub n: u32,
    pub f: u32,
    pub values: u32,
    pub max_round: u32,
    pub defaults: Vec<u32>,
}

impl SeqPaxos {
    /// Sized for `iterations + 1` runs from [`SeqPaxos::init`], with the
    /// default table `[0, 1, …, values - 1]`.
    pub fn new(n: u32, f: u32, values: u32, iterations: u32) -> Self {
        SeqPaxos { n, f, values, max_round: iterations + 2, defaults: (0..values).collect() }
    }

    /// Leader `n=1, f=1, b=0`; replicas `n, f, b=0`.
    pub fn config(&self) -> Result<Config, ConfigError> {
        Config::new().with_role(&leader(), 1, 1, 0)?.with_role(&replica(), self.n, self.f, 0)
    }

    pub fn default_value(&self, round: u32) -> u32 {
        self.defaults[round as usize % self.defaults.len()]
    }

    pub fn value_type(&self) -> ValueType {
        ValueType::nat(self.values - 1)
    }

    pub fn round_type(&self) -> ValueType {
        ValueType::nat(self.max_round)
    }

    /// `(option V) * nat`, the replica state.
    pub fn replica_type(&self) -> ValueType {
        ValueType::pair(ValueType::option(self.value_type()), self.round_type())
    }

    pub fn input_var() -> Var {
        Var::new("x")
    }

    pub fn body(&self) -> ProtocolBody {
        let (l, r) = (leader(), replica());
        let (n, f, rmax) = (self.n, self.f, self.max_round);
        let vt = self.value_type();
        let rt = self.round_type();
        let st = self.replica_type();
        let prop_ty = ValueType::pair(vt.clone(), rt.clone());
        let cnt_ty = ValueType::nat(n);
        let out_ty = ValueType::pair(ValueType::option(vt.clone()), rt.clone());
        let tag = [("n", n), ("f", f), ("v", self.values), ("r", rmax)];
        let mut reg = Registry::new();

        let fmaxr = def(
            &mut reg,
            PureFn::new(fn_name("fmaxr", &tag), vec![st.clone(), st.clone()], st.clone(), |a| {
                let r1 = a[0].pair_arg().1.nat_arg();
                let r2 = a[1].pair_arg().1.nat_arg();
                if r1 < r2 {
                    a[1].clone()
                } else {
                    a[0].clone()
                }
            }),
        );
        let defaults = self.defaults.clone();
        let default = def(
            &mut reg,
            PureFn::new(fn_name("default", &tag), vec![rt.clone()], vt.clone(), move |a| {
                Value::Nat(defaults[a[0].nat_arg() as usize % defaults.len()])
            }),
        );
        let pickp = def(
            &mut reg,
            PureFn::new(fn_name("pickp", &tag), vec![st.clone(), vt.clone()], vt.clone(), |a| {
                match a[0].pair_arg().0.as_option().flatten() {
                    Some(v) => v.clone(),
                    None => a[1].clone(),
                }
            }),
        );
        let pair_prop = def(
            &mut reg,
            PureFn::new(fn_name("pair_prop", &tag), vec![vt.clone(), rt.clone()], prop_ty.clone(), |a| {
                Value::pair(a[0].clone(), a[1].clone())
            }),
        );
        let update = def(
            &mut reg,
            PureFn::new(fn_name("update", &tag), vec![st.clone(), prop_ty], st.clone(), |a| {
                let (v, r) = a[1].pair_arg();
                Value::pair(Value::some(v.clone()), r.clone())
            }),
        );
        let fcnteq = def(
            &mut reg,
            PureFn::new(fn_name("fcnteq_round", &tag), vec![rt.clone(), cnt_ty.clone(), st.clone()], cnt_ty.clone(), |a| {
                let c = a[1].nat_arg();
                Value::Nat(if &a[0] == a[2].pair_arg().1 { c + 1 } else { c })
            })
            .fold_commutative(),
        );
        let mkdec = def(
            &mut reg,
            PureFn::new(fn_name("mkdec", &tag), vec![cnt_ty.clone(), vt.clone()], ValueType::option(vt), move |a| {
                if a[0].nat_arg() > f {
                    Value::some(a[1].clone())
                } else {
                    Value::none()
                }
            }),
        );
        let pair_out = def(
            &mut reg,
            PureFn::new(
                fn_name("pair_out", &tag),
                vec![ValueType::option(self.value_type()), rt.clone()],
                out_ty.clone(),
                |a| Value::pair(a[0].clone(), a[1].clone()),
            ),
        );
        let add = def(
            &mut reg,
            PureFn::new(fn_name("add", &tag), vec![rt.clone(), rt.clone()], rt.clone(), move |a| {
                Value::Nat((a[0].nat_arg() + a[1].nat_arg()).min(rmax))
            }),
        );
        let snd = def(
            &mut reg,
            PureFn::new(fn_name("snd", &tag), vec![out_ty], rt.clone(), |a| a[0].pair_arg().1.clone()),
        );

        let x = Self::input_var();
        let (maxv, p, y, cnt) = (Var::new("maxv"), Var::new("p"), Var::new("y"), Var::new("cnt"));
        let xl = || Expr::var(&x, &l);
        let program = Program::let_(
            &maxv,
            Program::comm(
                &ChannelId::new("c1"),
                Expr::var(&x, &r),
                Expr::constant(Value::pair(Value::none(), Value::Nat(0)), st.clone(), &l),
                Expr::func(&fmaxr, &l),
            ),
            Program::let_(
                &p,
                Program::ret([(
                    l.clone(),
                    Expr::call(&pickp, &l, [Expr::var(&maxv, &l), Expr::call(&default, &l, [xl()])]),
                )]),
                Program::let_(
                    &y,
                    Program::comm(
                        &ChannelId::new("c2"),
                        Expr::call(&pair_prop, &l, [Expr::var(&p, &l), xl()]),
                        Expr::var(&x, &r),
                        Expr::func(&update, &r),
                    ),
                    Program::let_(
                        &cnt,
                        Program::comm(
                            &ChannelId::new("c3"),
                            Expr::var(&y, &r),
                            Expr::constant(Value::Nat(0), cnt_ty, &l),
                            Expr::call(&fcnteq, &l, [xl()]),
                        ),
                        Program::ret([
                            (
                                l.clone(),
                                Expr::call(
                                    &pair_out,
                                    &l,
                                    [
                                        Expr::call(&mkdec, &l, [Expr::var(&cnt, &l), Expr::var(&p, &l)]),
                                        Expr::call(&add, &l, [xl(), Expr::constant(Value::Nat(1), rt.clone(), &l)]),
                                    ],
                                ),
                            ),
                            (r.clone(), Expr::var(&y, &r)),
                        ]),
                    ),
                ),
            ),
        );
        let input: RecordType = [(l.clone(), rt), (r.clone(), st)].into_iter().collect();
        ProtocolBody::new(x, input, [l.clone(), r].into_iter().collect(), program)
            .and_then(|b| b.with_thread(&l, snd))
            .expect("well-typed by construction")
    }

    /// `iter(body, k)`: `k + 1` iterations.
    pub fn iterated(&self, k: u32) -> Result<ProtocolBody, TypeError> {
        iter(&self.body(), k)
    }

    /// `{L ↦ [1], R ↦ [(None, 0)]ⁿ}`.
    pub fn init(&self) -> BTreeMap<Role, Vec<Value>> {
        self.inputs(1, &vec![(None, 0); self.n as usize])
    }

    pub fn inputs(&self, round: u32, replicas: &[(Option<u32>, u32)]) -> BTreeMap<Role, Vec<Value>> {
        let rs = replicas.iter().map(|&(v, r)| Self::replica_value(v, r)).collect();
        [(leader(), vec![Value::Nat(round)]), (replica(), rs)].into_iter().collect()
    }

    pub fn replica_value(v: Option<u32>, r: u32) -> Value {
        Value::pair(v.map_or_else(Value::none, |v| Value::some(Value::Nat(v))), Value::Nat(r))
    }
}
