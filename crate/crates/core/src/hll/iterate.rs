use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{subst_prog, typecheck_prog, ChannelContext, Expr, Program, RecordType, Role, TypeEnv, TypeError, Var};
use crate::values::{FnRef, Value};

/// `ν c₁…cₙ. λx. p`: a loop body whose channels are renamed on every copy.
///
/// `thread` maps a role to the function applied to that role's output before
/// it is fed into the next iteration; roles without an entry pass through.
#[derive(Debug, Clone)]
pub struct ProtocolBody {
    input: Var,
    input_type: RecordType,
    roles: BTreeSet<Role>,
    program: Arc<Program>,
    thread: BTreeMap<Role, FnRef>,
    delta: ChannelContext,
    output_type: RecordType,
}

impl ProtocolBody {
    pub fn new(
        input: Var,
        input_type: RecordType,
        roles: BTreeSet<Role>,
        program: Program,
    ) -> Result<Self, TypeError> {
        let mut gamma = TypeEnv::new();
        gamma.insert(input.clone(), input_type.clone());
        let (delta, output_type) = typecheck_prog(&gamma, &roles, &program)?;
        Ok(ProtocolBody {
            input,
            input_type,
            roles,
            program: Arc::new(program),
            thread: BTreeMap::new(),
            delta,
            output_type,
        })
    }

    /// `λx. ret {R ↦ x@R}`.
    pub fn identity(input: Var, input_type: RecordType) -> Result<Self, TypeError> {
        let roles = input_type.keys().cloned().collect();
        let ret = Program::ret(input_type.keys().map(|r| (r.clone(), Expr::var(&input, r))));
        ProtocolBody::new(input, input_type, roles, ret)
    }

    /// Sets the function threading `role`'s output into the next input.
    pub fn with_thread(mut self, role: &Role, f: FnRef) -> Result<Self, TypeError> {
        let out = self
            .output_type
            .get(role)
            .ok_or_else(|| TypeError::UnknownRole(role.clone()))?;
        let fits = f.params().len() == 1
            && &f.params()[0] == out
            && self.input_type.get(role) == Some(f.ret());
        if !fits {
            return Err(TypeError::ThreadMismatch { role: role.clone(), ty: out.clone() });
        }
        self.thread.insert(role.clone(), f);
        Ok(self)
    }

    pub fn input(&self) -> &Var {
        &self.input
    }

    pub fn input_type(&self) -> &RecordType {
        &self.input_type
    }

    pub fn roles(&self) -> &BTreeSet<Role> {
        &self.roles
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn thread(&self) -> &BTreeMap<Role, FnRef> {
        &self.thread
    }

    pub fn delta(&self) -> &ChannelContext {
        &self.delta
    }

    pub fn output_type(&self) -> &RecordType {
        &self.output_type
    }

    /// Output type after threading, restricted to the input roles.
    pub fn threaded_output(&self) -> Result<RecordType, TypeError> {
        let mut out = RecordType::new();
        for r in self.input_type.keys() {
            let ty = match self.thread.get(r) {
                Some(f) => f.ret().clone(),
                None => self.output_type.get(r).cloned().ok_or_else(|| TypeError::BodyMismatch {
                    output: self.output_type.clone(),
                    input: self.input_type.clone(),
                })?,
            };
            out.insert(r.clone(), ty);
        }
        Ok(out)
    }

    /// The closed program `let x := ret {R ↦ [v…]} in p`.
    pub fn apply(&self, inputs: &BTreeMap<Role, Vec<Value>>) -> Program {
        let fields = self
            .input_type
            .iter()
            .map(|(r, ty)| (r.clone(), inputs.get(r).cloned().unwrap_or_default(), ty.clone()))
            .collect();
        (*self.program).clone().with_inputs([(self.input.clone(), fields)])
    }

    fn max_fresh(&self) -> u32 {
        let chans = self.program.channels().into_iter().map(|c| c.fresh());
        let vars = self.program.bound_vars().into_iter().map(|v| v.fresh());
        chans.chain(vars).chain([self.input.fresh()]).max().unwrap_or(0)
    }
}

/// `b1 ++ b2`: runs `b1`, threads its output into `b2`'s input.
pub fn concat(b1: &ProtocolBody, b2: &ProtocolBody) -> Result<ProtocolBody, TypeError> {
    let output = b1.threaded_output()?;
    if output != b2.input_type {
        return Err(TypeError::BodyMismatch { output, input: b2.input_type.clone() });
    }
    let shift = b1.max_fresh() + 1;
    let x2 = b2.input.shifted(shift);
    let p2 = b2.program.rename(shift);
    let program = graft(&b1.program, &x2, &p2, &b1.thread)?;
    let roles = b1.roles.union(&b2.roles).cloned().collect();
    let mut body = ProtocolBody::new(b1.input.clone(), b1.input_type.clone(), roles, program)?;
    body.thread = b2.thread.clone();
    Ok(body)
}

fn threaded(thread: &BTreeMap<Role, FnRef>, r: &Role, e: Expr) -> Expr {
    match thread.get(r) {
        Some(f) => Expr::call(f, r, [e]),
        None => e,
    }
}

// p[λx'.p'] with threading applied at the seam.
fn graft(
    p: &Program,
    x: &Var,
    next: &Program,
    thread: &BTreeMap<Role, FnRef>,
) -> Result<Program, TypeError> {
    match p {
        Program::Ret(fields) => {
            let with = fields
                .iter()
                .map(|(r, e)| (r.clone(), threaded(thread, r, e.clone())))
                .collect();
            subst_prog(next, x, &with)
        }
        Program::Let { var, bound, body } => Ok(Program::Let {
            var: var.clone(),
            bound: bound.clone(),
            body: Arc::new(graft(body, x, next, thread)?),
        }),
        Program::Comm { default, .. } => {
            let r = default.role();
            let body = if thread.contains_key(r) {
                let with = [(r.clone(), threaded(thread, r, Expr::var(x, r)))].into_iter().collect();
                subst_prog(next, x, &with)?
            } else {
                next.clone()
            };
            Ok(Program::let_(x, p.clone(), body))
        }
    }
}

/// `b⁰ = b`, `bᵏ⁺¹ = b ++ bᵏ`.
pub fn iter(b: &ProtocolBody, k: u32) -> Result<ProtocolBody, TypeError> {
    let mut acc = b.clone();
    for _ in 0..k {
        acc = concat(b, &acc)?;
    }
    Ok(acc)
}
