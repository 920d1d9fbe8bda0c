use alloc::collections::BTreeMap;
use alloc::sync::Arc;

use super::{fresh_name, Expr, Program, Role, TypeError, Var};

/// Replaces every `x@R` in `p` by `with[R]`.
pub fn subst_prog(p: &Program, x: &Var, with: &BTreeMap<Role, Expr>) -> Result<Program, TypeError> {
    Ok(match p {
        Program::Ret(fields) => Program::Ret(
            fields
                .iter()
                .map(|(r, e)| Ok((r.clone(), e.subst(x, with)?)))
                .collect::<Result<_, TypeError>>()?,
        ),
        Program::Let { var, bound, body } => Program::Let {
            var: var.clone(),
            bound: Arc::new(subst_prog(bound, x, with)?),
            body: if var == x { body.clone() } else { Arc::new(subst_prog(body, x, with)?) },
        },
        Program::Comm { chan, msg, default, combine } => Program::Comm {
            chan: chan.clone(),
            msg: msg.subst(x, with)?,
            default: default.subst(x, with)?,
            combine: combine.subst(x, with)?,
        },
    })
}

/// Whether `p` is a chain of `let x := comm ... in` ending in `ret`.
pub fn is_normal(p: &Program) -> bool {
    match p {
        Program::Ret(_) => true,
        Program::Let { bound, body, .. } => matches!(**bound, Program::Comm { .. }) && is_normal(body),
        Program::Comm { .. } => false,
    }
}

/// Puts a well-typed program into let-comm normal form using the monad laws.
///
/// Nested lets are flattened, `let x := ret r in p` substitutes `r` into `p`,
/// and a bare `comm` is bound to a generated `%`-prefixed variable. The result
/// has the same channels in the same order.
pub fn normalize(p: &Program) -> Result<Program, TypeError> {
    let mut counter = 0;
    norm(p, &mut counter)
}

fn norm(p: &Program, counter: &mut u32) -> Result<Program, TypeError> {
    match p {
        Program::Ret(_) => Ok(p.clone()),
        Program::Comm { default, .. } => {
            let receiver = default.role().clone();
            let v = Var::new(&fresh_name("%", *counter));
            *counter += 1;
            let ret = Program::ret([(receiver.clone(), Expr::var(&v, &receiver))]);
            Ok(Program::let_(&v, p.clone(), ret))
        }
        Program::Let { var, bound, body } if matches!(**bound, Program::Comm { .. }) => {
            Ok(Program::Let { var: var.clone(), bound: bound.clone(), body: Arc::new(norm(body, counter)?) })
        }
        Program::Let { var, bound, body } => {
            let nb = norm(bound, counter)?;
            splice(var, &nb, body, counter)
        }
    }
}

// `let x := nb in body` where `nb` is already normal.
fn splice(x: &Var, nb: &Program, body: &Program, counter: &mut u32) -> Result<Program, TypeError> {
    match nb {
        Program::Ret(fields) => norm(&subst_prog(body, x, fields)?, counter),
        Program::Let { var, bound, body: rest } => Ok(Program::Let {
            var: var.clone(),
            bound: bound.clone(),
            body: Arc::new(splice(x, rest, body, counter)?),
        }),
        Program::Comm { .. } => unreachable!("normal forms never end in a bare comm"),
    }
}
