//! Lifted (ungrounded) HDDL representation.
//!
//! Source positions are not part of these values, so two parses of
//! equivalent text compare equal.

/// `object` is the implicit root of every type hierarchy.
pub const ROOT_TYPE: &str = "object";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedParam {
    /// Variable name including the leading `?`.
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn text(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn is_equality(&self) -> bool {
        self.predicate == "="
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedParam>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedParam>,
    pub precondition: Vec<Literal>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSchema {
    pub name: String,
    pub params: Vec<TypedParam>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskCall {
    pub name: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtask {
    pub label: Option<String>,
    pub call: TaskCall,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSchema {
    pub name: String,
    pub params: Vec<TypedParam>,
    pub task: TaskCall,
    pub precondition: Vec<Literal>,
    /// Totally ordered.
    pub subtasks: Vec<Subtask>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LiftedDomain {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypeDecl>,
    pub constants: Vec<(String, String)>,
    pub predicates: Vec<PredicateDecl>,
    pub tasks: Vec<TaskSchema>,
    pub methods: Vec<MethodSchema>,
    pub actions: Vec<ActionSchema>,
}

impl LiftedDomain {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn task(&self, name: &str) -> Option<&TaskSchema> {
        self.tasks.iter().find(|t| t.name == name)
    }

    pub fn has_type(&self, name: &str) -> bool {
        name == ROOT_TYPE || self.types.iter().any(|t| t.name == name)
    }

    /// True if `ty` equals `ancestor` or descends from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        // Bounded walk guards against cyclic declarations.
        for _ in 0..=self.types.len() {
            if cur == ancestor {
                return true;
            }
            match self.types.iter().find(|t| t.name == cur) {
                Some(t) => cur = &t.parent,
                None => return ancestor == ROOT_TYPE,
            }
        }
        false
    }

    /// Arity of a declared primitive action or compound task.
    pub fn task_arity(&self, name: &str) -> Option<usize> {
        self.action(name)
            .map(|a| a.params.len())
            .or_else(|| self.task(name).map(|t| t.params.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundCall {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LiftedProblem {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<(String, String)>,
    pub initial_network: Vec<GroundCall>,
    pub init: Vec<GroundAtom>,
    /// Conjunction of positive atoms; may be empty.
    pub goal: Vec<GroundAtom>,
}
