use alloc::vec;
use alloc::vec::Vec;

use super::{def, fn_name, leader, replica};
use crate::denote::{Config, ConfigError};
use crate::hll::{ChannelId, Expr, Program, Var};
use crate::values::{PureFn, Registry, Value, ValueType};

/// The leader/replica vote: replicas send their bit, the leader counts the
/// ones equal to its own and decides on at least `n - 2f` matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimpleVote {
    pub n: u32,
    pub f: u32,
}

impl SimpleVote {
    pub fn new(n: u32, f: u32) -> Self {
        SimpleVote { n, f }
    }

    /// One leader without faults, `n` replicas of which `b` are Byzantine.
    pub fn config(&self, b: u32) -> Result<Config, ConfigError> {
        Config::new().with_role(&leader(), 1, 0, 0)?.with_role(&replica(), self.n, self.f, b)
    }

    pub fn p() -> Var {
        Var::new("p")
    }

    pub fn x() -> Var {
        Var::new("x")
    }

    /// `let cnt := comm c x 0 (fcnteq p) in ret (calc_dec cnt p)`, open in
    /// `p : {L: bool}` and `x : {R: bool}`.
    pub fn program(&self) -> Program {
        let (l, r) = (leader(), replica());
        let (n, f) = (self.n, self.f);
        let cnt_ty = ValueType::nat(n);
        let mut reg = Registry::new();
        let fcnteq = def(
            &mut reg,
            PureFn::new(fn_name("fcnteq", &[("n", n)]), vec![ValueType::Bool, cnt_ty.clone(), ValueType::Bool], cnt_ty.clone(), |a| {
                let c = a[1].nat_arg();
                Value::Nat(if a[0] == a[2] { c + 1 } else { c })
            })
            .fold_commutative(),
        );
        let calc_dec = def(
            &mut reg,
            PureFn::new(
                fn_name("calc_dec", &[("n", n), ("f", f)]),
                vec![cnt_ty.clone(), ValueType::Bool],
                ValueType::option(ValueType::Bool),
                move |a| {
                    if a[0].nat_arg() + 2 * f >= n {
                        Value::some(a[1].clone())
                    } else {
                        Value::none()
                    }
                },
            ),
        );
        let cnt = Var::new("cnt");
        Program::let_(
            &cnt,
            Program::comm(
                &ChannelId::new("c"),
                Expr::var(&Self::x(), &r),
                Expr::constant(Value::Nat(0), cnt_ty, &l),
                Expr::call(&fcnteq, &l, [Expr::var(&Self::p(), &l)]),
            ),
            Program::ret([(l.clone(), Expr::call(&calc_dec, &l, [Expr::var(&cnt, &l), Expr::var(&Self::p(), &l)]))]),
        )
    }

    /// The program closed over the leader's bit and the good replicas' bits.
    pub fn closed(&self, p: bool, x: &[bool]) -> Program {
        let xs: Vec<Value> = x.iter().map(|&v| Value::Bool(v)).collect();
        self.program().with_inputs([
            (Self::p(), vec![(leader(), vec![Value::Bool(p)], ValueType::Bool)]),
            (Self::x(), vec![(replica(), xs, ValueType::Bool)]),
        ])
    }
}
