use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{def, fn_name, replica};
use crate::denote::{Config, ConfigError};
use crate::hll::{iter, ChannelId, Expr, Program, ProtocolBody, RecordType, Role, TypeError, Var};
use crate::values::{PureFn, Registry, Value, ValueType};

/// Binary one-step Byzantine consensus over a single role `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bosco {
    pub n: u32,
    pub f: u32,
    /// Decide `⊤` already at `2·cnt ≥ n + 3f`.
    pub asymmetric: bool,
}

impl Bosco {
    pub fn new(n: u32, f: u32) -> Self {
        Bosco { n, f, asymmetric: false }
    }

    pub fn with_asymmetric(mut self, on: bool) -> Self {
        self.asymmetric = on;
        self
    }

    pub fn config(&self, b: u32) -> Result<Config, ConfigError> {
        Config::new().with_role(&replica(), self.n, self.f, b)
    }

    /// Lines 5–7: `(decision, next input)` from `(cnt_⊤, cnt_⊥)`.
    pub fn mkdec(&self, cnt_top: u32, cnt_bot: u32) -> (Option<bool>, bool) {
        let (newv, cnt) = if cnt_top >= cnt_bot { (true, cnt_top) } else { (false, cnt_bot) };
        let bound = self.n + 3 * self.f;
        let decides = if self.asymmetric && newv { 2 * cnt >= bound } else { 2 * cnt > bound };
        (decides.then_some(newv), newv)
    }

    /// The univalent condition on good inputs: `UC_B`, or `UC'_B` when
    /// asymmetric.
    pub fn univalent(&self, b: bool, x: &[bool]) -> bool {
        let count = 2 * x.iter().filter(|&&v| v == b).count() as u32;
        let bound = self.n + self.f;
        if self.asymmetric && b {
            count >= bound
        } else {
            count > bound
        }
    }

    pub fn input_var() -> Var {
        Var::new("v")
    }

    /// One iteration; the next input is the second output component.
    pub fn body(&self) -> ProtocolBody {
        let r = replica();
        let n = self.n;
        let cnt_ty = ValueType::pair(ValueType::nat(n), ValueType::nat(n));
        let out_ty = ValueType::pair(ValueType::option(ValueType::Bool), ValueType::Bool);
        let mut reg = Registry::new();
        let fcntb = def(
            &mut reg,
            PureFn::new(fn_name("fcntb", &[("n", n)]), vec![cnt_ty.clone(), ValueType::Bool], cnt_ty.clone(), |a| {
                let (t, b) = a[0].pair_arg();
                let (t, b) = (t.nat_arg(), b.nat_arg());
                if a[1].bool_arg() {
                    Value::pair(Value::Nat(t + 1), Value::Nat(b))
                } else {
                    Value::pair(Value::Nat(t), Value::Nat(b + 1))
                }
            })
            .fold_commutative(),
        );
        let this = *self;
        let mkdec = def(
            &mut reg,
            PureFn::new(
                fn_name("mkdec", &[("n", n), ("f", self.f), ("asym", self.asymmetric as u32)]),
                vec![cnt_ty.clone()],
                out_ty.clone(),
                move |a| {
                    let (t, b) = a[0].pair_arg();
                    let (dec, newv) = this.mkdec(t.nat_arg(), b.nat_arg());
                    Value::pair(dec.map_or_else(Value::none, |d| Value::some(Value::Bool(d))), Value::Bool(newv))
                },
            ),
        );
        let snd = def(
            &mut reg,
            PureFn::new("snd", vec![out_ty], ValueType::Bool, |a| a[0].pair_arg().1.clone()),
        );
        let cnts = Var::new("cnts");
        let program = Program::let_(
            &cnts,
            Program::comm(
                &ChannelId::new("c"),
                Expr::var(&Self::input_var(), &r),
                Expr::constant(Value::pair(Value::Nat(0), Value::Nat(0)), cnt_ty, &r),
                Expr::func(&fcntb, &r),
            ),
            Program::ret([(r.clone(), Expr::call(&mkdec, &r, [Expr::var(&cnts, &r)]))]),
        );
        let input: RecordType = [(r.clone(), ValueType::Bool)].into_iter().collect();
        ProtocolBody::new(Self::input_var(), input, [r.clone()].into_iter().collect(), program)
            .and_then(|b| b.with_thread(&r, snd))
            .expect("well-typed by construction")
    }

    /// `iter(body, k)`: `k + 1` iterations.
    pub fn iterated(&self, k: u32) -> Result<ProtocolBody, TypeError> {
        iter(&self.body(), k)
    }

    pub fn inputs(x: &[bool]) -> BTreeMap<Role, Vec<Value>> {
        [(replica(), x.iter().map(|&v| Value::Bool(v)).collect())].into_iter().collect()
    }
}
