//! Type trees for mixtures of coinductive types: constant types, container
//! ids, coinductive-leafed trees (`Ctt`), slot-leafed trees (`Stt`), level
//! sets with their order, and the cotype registry.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CttError {
    #[error("enum constant type must have at least one tag")]
    EmptyEnum,
    #[error("node `{0}` expects {1} children, got {2}")]
    Arity(String, usize, usize),
    #[error("identity container is not allowed as an explicit slot-tree node")]
    IdentInStt,
    #[error("exponent arity inside a cotype must be a finite constant type, got {0}")]
    InfiniteArity(String),
    #[error("exponent arity cannot be a coinductive constant")]
    CoArity,
    #[error("unknown cotype `{0}`")]
    UnknownCotype(String),
    #[error("duplicate cotype name `{0}`")]
    DuplicateCotype(String),
    #[error("cotype `{0}` admits no default value witness")]
    Empty(String),
    #[error("level does not mirror the type tree at path {0:?}")]
    LevelShape(Vec<usize>),
    #[error("no subtree at path {0:?}")]
    BadPath(Vec<usize>),
}

/// Closed universe of constant (non-coinductive) component types.
///
/// `Co` embeds values of an already-registered cotype as opaque constants;
/// this is how nested coinductives such as streams of streams are formed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstType {
    Nat,
    Int,
    Bool,
    Unit,
    Enum(u64),
    Pair(Box<ConstType>, Box<ConstType>),
    Co(CotypeId),
}

impl ConstType {
    /// Number of inhabitants, `None` when infinite.
    pub fn card(&self) -> Option<u64> {
        match self {
            ConstType::Nat | ConstType::Int | ConstType::Co(_) => None,
            ConstType::Bool => Some(2),
            ConstType::Unit => Some(1),
            ConstType::Enum(k) => Some(*k),
            ConstType::Pair(a, b) => Some(a.card()?.checked_mul(b.card()?)?),
        }
    }

    pub fn validate(&self) -> Result<(), CttError> {
        match self {
            ConstType::Enum(0) => Err(CttError::EmptyEnum),
            ConstType::Pair(a, b) => {
                a.validate()?;
                b.validate()
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ConstType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstType::Nat => write!(f, "nat"),
            ConstType::Int => write!(f, "int"),
            ConstType::Bool => write!(f, "bool"),
            ConstType::Unit => write!(f, "unit"),
            ConstType::Enum(k) => write!(f, "(enum {k})"),
            ConstType::Pair(a, b) => write!(f, "(pair {a} {b})"),
            ConstType::Co(id) => write!(f, "(co #{})", id.0),
        }
    }
}

/// Identifier of a registered cotype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CotypeId(pub u32);

/// The container (semantic polynomial functor) alphabet used by type trees.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SpfId {
    Product,
    Sum,
    ListF,
    Exp(ConstType),
    ConstF(ConstType),
    IdF,
}

impl SpfId {
    /// Number of child positions in a type tree node.
    pub fn arity(&self) -> usize {
        match self {
            SpfId::Product | SpfId::Sum => 2,
            SpfId::ListF | SpfId::Exp(_) | SpfId::IdF => 1,
            SpfId::ConstF(_) => 0,
        }
    }

    /// Whether the container has exactly one shape. Drives rule (4) of the
    /// level order: product/exponent/identity do, sums and lists do not,
    /// constants only when the carrier is a singleton.
    pub fn single_shape(&self) -> bool {
        match self {
            SpfId::Product | SpfId::Exp(_) | SpfId::IdF => true,
            SpfId::Sum | SpfId::ListF => false,
            SpfId::ConstF(t) => t.card() == Some(1),
        }
    }

    fn name(&self) -> String {
        match self {
            SpfId::Product => "prod".into(),
            SpfId::Sum => "sum".into(),
            SpfId::ListF => "list".into(),
            SpfId::Exp(a) => format!("exp {a}"),
            SpfId::ConstF(a) => format!("const {a}"),
            SpfId::IdF => "id".into(),
        }
    }
}

/// Coinductive-leafed type tree: leaves are registered cotypes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ctt {
    Leaf(CotypeId),
    Node(SpfId, Vec<Ctt>),
}

/// Slot-leafed type tree: leaves are self-references of the cotype being
/// defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stt {
    Slot,
    Node(SpfId, Vec<Stt>),
}

pub type Path = Vec<usize>;

/// Depth-annotated tree mirroring a `Ctt`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Level {
    Depth(u64),
    NodeNone,
    NodeSome(Vec<Level>),
}

pub fn const_ctt(t: ConstType) -> Ctt {
    Ctt::Node(SpfId::ConstF(t), vec![])
}

pub fn prod_ctt(a: Ctt, b: Ctt) -> Ctt {
    Ctt::Node(SpfId::Product, vec![a, b])
}

pub fn sum_ctt(a: Ctt, b: Ctt) -> Ctt {
    Ctt::Node(SpfId::Sum, vec![a, b])
}

pub fn exp_ctt(a: ConstType, c: Ctt) -> Ctt {
    Ctt::Node(SpfId::Exp(a), vec![c])
}

/// A registered cotype: its generating slot tree and the elaborated
/// one-layer tree with slots replaced by self leaves.
#[derive(Debug, Clone)]
pub struct CotypeDef {
    pub id: CotypeId,
    pub name: String,
    pub stt: Stt,
    pub self_ctt: Ctt,
}

impl CotypeDef {
    pub fn ident_ctt(&self) -> Ctt {
        Ctt::Leaf(self.id)
    }

    /// `Some(elem)` when the cotype is a plain stream `<T> * self`.
    pub fn stream_elem(&self) -> Option<&ConstType> {
        if let Ctt::Node(SpfId::Product, ch) = &self.self_ctt {
            if let (Ctt::Node(SpfId::ConstF(t), _), Ctt::Leaf(id)) = (&ch[0], &ch[1]) {
                if *id == self.id {
                    return Some(t);
                }
            }
        }
        None
    }
}

#[derive(Debug, Default)]
pub struct Registry {
    cotypes: Vec<Rc<CotypeDef>>,
    by_name: HashMap<String, CotypeId>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: CotypeId) -> Rc<CotypeDef> {
        self.cotypes[id.0 as usize].clone()
    }

    pub fn lookup(&self, name: &str) -> Option<CotypeId> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.cotypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cotypes.is_empty()
    }

    /// Registers a cotype from its slot tree. The slot tree is validated,
    /// every slot is replaced by a self leaf, and a default-value witness
    /// must be synthesizable (nonemptiness precondition of the fixed-point
    /// theorems).
    pub fn elaborate_cotype(&mut self, name: &str, stt: Stt) -> Result<CotypeId, CttError> {
        if self.by_name.contains_key(name) {
            return Err(CttError::DuplicateCotype(name.to_string()));
        }
        let id = CotypeId(self.cotypes.len() as u32);
        self.validate_stt(&stt)?;
        if !self.stt_has_witness(&stt) {
            return Err(CttError::Empty(name.to_string()));
        }
        let self_ctt = stt_to_ctt(&stt, id);
        let def = CotypeDef {
            id,
            name: name.to_string(),
            stt,
            self_ctt,
        };
        self.cotypes.push(Rc::new(def));
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    fn validate_stt(&self, stt: &Stt) -> Result<(), CttError> {
        match stt {
            Stt::Slot => Ok(()),
            Stt::Node(spf, children) => {
                if matches!(spf, SpfId::IdF) {
                    return Err(CttError::IdentInStt);
                }
                if children.len() != spf.arity() {
                    return Err(CttError::Arity(spf.name(), spf.arity(), children.len()));
                }
                match spf {
                    SpfId::Exp(a) => {
                        a.validate()?;
                        if matches!(a, ConstType::Co(_)) {
                            return Err(CttError::CoArity);
                        }
                        if a.card().is_none() {
                            return Err(CttError::InfiniteArity(a.to_string()));
                        }
                    }
                    SpfId::ConstF(a) => {
                        a.validate()?;
                        if let ConstType::Co(id) = a {
                            if id.0 as usize >= self.cotypes.len() {
                                return Err(CttError::UnknownCotype(format!("#{}", id.0)));
                            }
                        }
                    }
                    _ => {}
                }
                for c in children {
                    self.validate_stt(c)?;
                }
                Ok(())
            }
        }
    }

    // Every constant type in the closed universe is inhabited, so a default
    // layer always exists; the check is kept structural so a rejection path
    // survives any future universe extension.
    fn stt_has_witness(&self, stt: &Stt) -> bool {
        match stt {
            Stt::Slot => true,
            Stt::Node(spf, children) => match spf {
                SpfId::ConstF(t) => t.card() != Some(0),
                SpfId::Sum => children.iter().any(|c| self.stt_has_witness(c)),
                SpfId::ListF => true,
                _ => children.iter().all(|c| self.stt_has_witness(c)),
            },
        }
    }

    /// Validates a general type tree against the registry (used by the
    /// front end when parsing type annotations).
    pub fn validate_ctt(&self, ctt: &Ctt) -> Result<(), CttError> {
        match ctt {
            Ctt::Leaf(id) => {
                if (id.0 as usize) < self.cotypes.len() {
                    Ok(())
                } else {
                    Err(CttError::UnknownCotype(format!("#{}", id.0)))
                }
            }
            Ctt::Node(spf, children) => {
                if children.len() != spf.arity() {
                    return Err(CttError::Arity(spf.name(), spf.arity(), children.len()));
                }
                match spf {
                    SpfId::Exp(a) | SpfId::ConstF(a) => {
                        a.validate()?;
                        if let SpfId::Exp(ConstType::Co(_)) = spf {
                            return Err(CttError::CoArity);
                        }
                        if let ConstType::Co(id) = a {
                            if id.0 as usize >= self.cotypes.len() {
                                return Err(CttError::UnknownCotype(format!("#{}", id.0)));
                            }
                        }
                    }
                    _ => {}
                }
                for c in children {
                    self.validate_ctt(c)?;
                }
                Ok(())
            }
        }
    }

    pub fn render_ctt(&self, ctt: &Ctt) -> String {
        match ctt {
            Ctt::Leaf(id) => self.get(*id).name.clone(),
            Ctt::Node(SpfId::ConstF(ConstType::Co(id)), _) => {
                format!("(const (co {}))", self.get(*id).name)
            }
            Ctt::Node(SpfId::ConstF(t), _) => format!("(const {t})"),
            Ctt::Node(SpfId::Product, ch) => format!(
                "(prod {} {})",
                self.render_ctt(&ch[0]),
                self.render_ctt(&ch[1])
            ),
            Ctt::Node(SpfId::Sum, ch) => format!(
                "(sum {} {})",
                self.render_ctt(&ch[0]),
                self.render_ctt(&ch[1])
            ),
            Ctt::Node(SpfId::ListF, ch) => format!("(list {})", self.render_ctt(&ch[0])),
            Ctt::Node(SpfId::Exp(a), ch) => format!("(exp {a} {})", self.render_ctt(&ch[0])),
            Ctt::Node(SpfId::IdF, ch) => self.render_ctt(&ch[0]),
        }
    }
}

fn stt_to_ctt(stt: &Stt, slot: CotypeId) -> Ctt {
    match stt {
        Stt::Slot => Ctt::Leaf(slot),
        Stt::Node(spf, children) => Ctt::Node(
            spf.clone(),
            children.iter().map(|c| stt_to_ctt(c, slot)).collect(),
        ),
    }
}

/// Minimum level: depth 0 at a leaf, absent at a node.
pub fn bottom(ctt: &Ctt) -> Level {
    match ctt {
        Ctt::Leaf(_) => Level::Depth(0),
        Ctt::Node(..) => Level::NodeNone,
    }
}

/// Uniform level: depth `n` at every leaf, present at every node.
pub fn level_each(ctt: &Ctt, n: u64) -> Level {
    match ctt {
        Ctt::Leaf(_) => Level::Depth(n),
        Ctt::Node(_, children) => {
            Level::NodeSome(children.iter().map(|c| level_each(c, n)).collect())
        }
    }
}

fn check_mirrors(ctt: &Ctt, l: &Level, at: &mut Path) -> Result<(), CttError> {
    match (ctt, l) {
        (Ctt::Leaf(_), Level::Depth(_)) => Ok(()),
        (Ctt::Node(..), Level::NodeNone) => Ok(()),
        (Ctt::Node(_, children), Level::NodeSome(ls)) if children.len() == ls.len() => {
            for (i, (c, cl)) in children.iter().zip(ls).enumerate() {
                at.push(i);
                check_mirrors(c, cl, at)?;
                at.pop();
            }
            Ok(())
        }
        _ => Err(CttError::LevelShape(at.clone())),
    }
}

pub fn mirrors(ctt: &Ctt, l: &Level) -> Result<(), CttError> {
    check_mirrors(ctt, l, &mut vec![])
}

/// The order on levels, by the four rules: pointwise on leaf depths, `None`
/// below everything, pointwise under matching `Some`, and the single-shape
/// collapse of an all-bottom `Some` into `None`.
pub fn level_le(ctt: &Ctt, l1: &Level, l2: &Level) -> Result<bool, CttError> {
    mirrors(ctt, l1)?;
    mirrors(ctt, l2)?;
    Ok(le_rec(ctt, l1, l2))
}

fn le_rec(ctt: &Ctt, l1: &Level, l2: &Level) -> bool {
    match (ctt, l1, l2) {
        (Ctt::Leaf(_), Level::Depth(a), Level::Depth(b)) => a <= b,
        (Ctt::Node(..), Level::NodeNone, _) => true,
        (Ctt::Node(_, children), Level::NodeSome(a), Level::NodeSome(b)) => children
            .iter()
            .zip(a.iter().zip(b))
            .all(|(c, (x, y))| le_rec(c, x, y)),
        (Ctt::Node(spf, children), Level::NodeSome(a), Level::NodeNone) => {
            spf.single_shape()
                && children
                    .iter()
                    .zip(a)
                    .all(|(c, x)| le_rec(c, x, &bottom(c)))
        }
        _ => false,
    }
}

/// Flattens a level to a map from leaf paths to depths; anything below an
/// absent node reads as depth 0.
pub fn level_fun(ctt: &Ctt, l: &Level) -> Result<std::collections::BTreeMap<Path, u64>, CttError> {
    mirrors(ctt, l)?;
    let mut out = std::collections::BTreeMap::new();
    fun_rec(ctt, Some(l), &mut vec![], &mut out);
    Ok(out)
}

fn fun_rec(
    ctt: &Ctt,
    l: Option<&Level>,
    at: &mut Path,
    out: &mut std::collections::BTreeMap<Path, u64>,
) {
    match ctt {
        Ctt::Leaf(_) => {
            let d = match l {
                Some(Level::Depth(n)) => *n,
                _ => 0,
            };
            out.insert(at.clone(), d);
        }
        Ctt::Node(_, children) => {
            let sub: Vec<Option<&Level>> = match l {
                Some(Level::NodeSome(ls)) => ls.iter().map(Some).collect(),
                _ => children.iter().map(|_| None).collect(),
            };
            for (i, (c, cl)) in children.iter().zip(sub).enumerate() {
                at.push(i);
                fun_rec(c, cl, at, out);
                at.pop();
            }
        }
    }
}

/// All leaf paths, left to right. Constant nodes contribute none.
pub fn dims(ctt: &Ctt) -> Vec<Path> {
    let mut out = vec![];
    dims_rec(ctt, &mut vec![], &mut out);
    out
}

fn dims_rec(ctt: &Ctt, at: &mut Path, out: &mut Vec<Path>) {
    match ctt {
        Ctt::Leaf(_) => out.push(at.clone()),
        Ctt::Node(_, children) => {
            for (i, c) in children.iter().enumerate() {
                at.push(i);
                dims_rec(c, at, out);
                at.pop();
            }
        }
    }
}

/// All internal node paths (including constant nodes), preorder.
pub fn node_paths(ctt: &Ctt) -> Vec<Path> {
    let mut out = vec![];
    nodes_rec(ctt, &mut vec![], &mut out);
    out
}

fn nodes_rec(ctt: &Ctt, at: &mut Path, out: &mut Vec<Path>) {
    if let Ctt::Node(_, children) = ctt {
        out.push(at.clone());
        for (i, c) in children.iter().enumerate() {
            at.push(i);
            nodes_rec(c, at, out);
            at.pop();
        }
    }
}

pub fn subtree<'a>(ctt: &'a Ctt, path: &[usize]) -> Result<&'a Ctt, CttError> {
    let mut cur = ctt;
    for (k, &i) in path.iter().enumerate() {
        match cur {
            Ctt::Node(_, children) if i < children.len() => cur = &children[i],
            _ => return Err(CttError::BadPath(path[..=k].to_vec())),
        }
    }
    Ok(cur)
}

/// Targets of the generated destructors: the maximal non-product subtrees of
/// a self tree, left to right.
pub fn dtor_targets(self_ctt: &Ctt) -> Vec<Path> {
    let mut out = vec![];
    fn rec(c: &Ctt, at: &mut Path, out: &mut Vec<Path>) {
        match c {
            Ctt::Node(SpfId::Product, children) => {
                for (i, ch) in children.iter().enumerate() {
                    at.push(i);
                    rec(ch, at, out);
                    at.pop();
                }
            }
            _ => out.push(at.clone()),
        }
    }
    rec(self_ctt, &mut vec![], &mut out);
    out
}

/// Every level whose leaf depths are at most `max_depth`, with all presence
/// assignments. Deterministic order; drives the bounded oracles.
pub fn enumerate_levels(ctt: &Ctt, max_depth: u64) -> Vec<Level> {
    match ctt {
        Ctt::Leaf(_) => (0..=max_depth).map(Level::Depth).collect(),
        Ctt::Node(_, children) => {
            let mut out = vec![Level::NodeNone];
            let per: Vec<Vec<Level>> = children
                .iter()
                .map(|c| enumerate_levels(c, max_depth))
                .collect();
            let mut acc: Vec<Vec<Level>> = vec![vec![]];
            for options in &per {
                let mut next = vec![];
                for prefix in &acc {
                    for o in options {
                        let mut p = prefix.clone();
                        p.push(o.clone());
                        next.push(p);
                    }
                }
                acc = next;
            }
            out.extend(acc.into_iter().map(Level::NodeSome));
            out
        }
    }
}

/// Largest depth among leaves of a level that sit below present nodes only.
pub fn max_active_depth(ctt: &Ctt, l: &Level) -> u64 {
    match (ctt, l) {
        (Ctt::Leaf(_), Level::Depth(n)) => *n,
        (Ctt::Node(_, children), Level::NodeSome(ls)) => children
            .iter()
            .zip(ls)
            .map(|(c, x)| max_active_depth(c, x))
            .max()
            .unwrap_or(0),
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream_reg() -> (Registry, CotypeId) {
        let mut reg = Registry::new();
        let stt = Stt::Node(
            SpfId::Product,
            vec![
                Stt::Node(SpfId::ConstF(ConstType::Nat), vec![]),
                Stt::Slot,
            ],
        );
        let id = reg.elaborate_cotype("stream", stt).unwrap();
        (reg, id)
    }

    fn stream_ctt() -> (Registry, Ctt, Ctt, Ctt) {
        let (reg, id) = stream_reg();
        let s = Ctt::Leaf(id);
        let nat_s = prod_ctt(const_ctt(ConstType::Nat), s.clone());
        let s_s = prod_ctt(s.clone(), s.clone());
        (reg, s, nat_s, s_s)
    }

    #[test]
    fn bottom_per_shape() {
        let (_reg, s, nat_s, s_s) = stream_ctt();
        assert_eq!(bottom(&s), Level::Depth(0));
        assert_eq!(bottom(&nat_s), Level::NodeNone);
        assert_eq!(bottom(&s_s), Level::NodeNone);
    }

    #[test]
    fn level_each_shapes() {
        let (_reg, s, nat_s, s_s) = stream_ctt();
        assert_eq!(level_each(&s, 3), Level::Depth(3));
        assert_eq!(
            level_each(&nat_s, 2),
            Level::NodeSome(vec![Level::NodeSome(vec![]), Level::Depth(2)])
        );
        assert_eq!(
            level_each(&s_s, 0),
            Level::NodeSome(vec![Level::Depth(0), Level::Depth(0)])
        );
    }

    #[test]
    fn order_rule_four_products_collapse() {
        let (_reg, s, nat_s, s_s) = stream_ctt();
        // product node with all-bottom children collapses into None
        let l = Level::NodeSome(vec![Level::Depth(0), Level::NodeNone]);
        assert!(level_le(&s_s, &l, &Level::NodeNone).is_err()); // shape mismatch: NodeNone at leaf
        let l = Level::NodeSome(vec![Level::Depth(0), Level::Depth(0)]);
        assert!(level_le(&s_s, &l, &Level::NodeNone).unwrap());
        let l = Level::NodeSome(vec![Level::NodeNone, Level::Depth(0)]);
        assert!(level_le(&nat_s, &l, &Level::NodeNone).unwrap());
        // sum node never collapses
        let s_plus_s = sum_ctt(s.clone(), s);
        let l = Level::NodeSome(vec![Level::Depth(0), Level::Depth(0)]);
        assert!(!level_le(&s_plus_s, &l, &Level::NodeNone).unwrap());
    }

    #[test]
    fn order_leaf_is_nat_order() {
        let (_reg, s, ..) = stream_ctt();
        assert!(level_le(&s, &Level::Depth(2), &Level::Depth(5)).unwrap());
        assert!(!level_le(&s, &Level::Depth(5), &Level::Depth(2)).unwrap());
    }

    #[test]
    fn singleton_const_collapses_but_nat_const_does_not() {
        let unit_node = const_ctt(ConstType::Unit);
        let some = Level::NodeSome(vec![]);
        assert!(level_le(&unit_node, &some, &Level::NodeNone).unwrap());
        let nat_node = const_ctt(ConstType::Nat);
        assert!(!level_le(&nat_node, &some, &Level::NodeNone).unwrap());
    }

    #[test]
    fn level_fun_cases() {
        let (_reg, s, nat_s, s_s) = stream_ctt();
        let f = level_fun(&s, &Level::Depth(7)).unwrap();
        assert_eq!(f.get(&vec![]).copied(), Some(7));
        let f = level_fun(&nat_s, &Level::NodeNone).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.get(&vec![1]).copied(), Some(0));
        let f = level_fun(
            &s_s,
            &Level::NodeSome(vec![Level::Depth(1), Level::Depth(4)]),
        )
        .unwrap();
        assert_eq!(f.get(&vec![0]).copied(), Some(1));
        assert_eq!(f.get(&vec![1]).copied(), Some(4));
    }

    #[test]
    fn dims_skip_const_nodes() {
        let (_reg, s, nat_s, s_s) = stream_ctt();
        assert_eq!(dims(&s), vec![Vec::<usize>::new()]);
        assert_eq!(dims(&s_s), vec![vec![0], vec![1]]);
        assert_eq!(dims(&nat_s), vec![vec![1]]);
    }

    #[test]
    fn elaborate_stream_and_bintree_and_lang() {
        let (reg, id) = stream_reg();
        let def = reg.get(id);
        assert_eq!(
            def.self_ctt,
            prod_ctt(const_ctt(ConstType::Nat), Ctt::Leaf(id))
        );
        assert!(def.stream_elem().is_some());

        let mut reg = Registry::new();
        let b = reg
            .elaborate_cotype(
                "bintree",
                Stt::Node(
                    SpfId::Product,
                    vec![
                        Stt::Node(
                            SpfId::Product,
                            vec![Stt::Node(SpfId::ConstF(ConstType::Nat), vec![]), Stt::Slot],
                        ),
                        Stt::Slot,
                    ],
                ),
            )
            .unwrap();
        let def = reg.get(b);
        assert_eq!(
            def.self_ctt,
            prod_ctt(
                prod_ctt(const_ctt(ConstType::Nat), Ctt::Leaf(b)),
                Ctt::Leaf(b)
            )
        );
        assert_eq!(dtor_targets(&def.self_ctt), vec![vec![0, 0], vec![0, 1], vec![1]]);

        let l = reg
            .elaborate_cotype(
                "lang",
                Stt::Node(
                    SpfId::Product,
                    vec![
                        Stt::Node(SpfId::ConstF(ConstType::Bool), vec![]),
                        Stt::Node(SpfId::Exp(ConstType::Enum(2)), vec![Stt::Slot]),
                    ],
                ),
            )
            .unwrap();
        let def = reg.get(l);
        assert_eq!(
            def.self_ctt,
            prod_ctt(
                const_ctt(ConstType::Bool),
                exp_ctt(ConstType::Enum(2), Ctt::Leaf(l))
            )
        );
        assert_eq!(dtor_targets(&def.self_ctt), vec![vec![0], vec![1]]);
    }

    #[test]
    fn elaborate_rejects_bad_stts() {
        let mut reg = Registry::new();
        assert!(matches!(
            reg.elaborate_cotype(
                "bad",
                Stt::Node(SpfId::ConstF(ConstType::Enum(0)), vec![])
            ),
            Err(CttError::EmptyEnum)
        ));
        assert!(matches!(
            reg.elaborate_cotype(
                "badexp",
                Stt::Node(SpfId::Exp(ConstType::Nat), vec![Stt::Slot])
            ),
            Err(CttError::InfiniteArity(_))
        ));
        assert!(matches!(
            reg.elaborate_cotype("badid", Stt::Node(SpfId::IdF, vec![Stt::Slot])),
            Err(CttError::IdentInStt)
        ));
    }

    fn test_ctts() -> (Registry, Vec<Ctt>) {
        let (reg, s, nat_s, s_s) = stream_ctt();
        let sum = sum_ctt(s.clone(), const_ctt(ConstType::Bool));
        let ex = exp_ctt(ConstType::Enum(2), s.clone());
        (reg, vec![s, nat_s, s_s, sum, ex])
    }

    #[test]
    fn order_laws_on_enumeration() {
        let (_reg, ctts) = test_ctts();
        for ctt in &ctts {
            let levels = enumerate_levels(ctt, 4);
            for a in &levels {
                assert!(level_le(ctt, a, a).unwrap(), "reflexivity");
                assert!(level_le(ctt, &bottom(ctt), a).unwrap(), "bottom minimum");
            }
            for a in &levels {
                for b in &levels {
                    if !level_le(ctt, a, b).unwrap() {
                        continue;
                    }
                    for c in &levels {
                        if level_le(ctt, b, c).unwrap() {
                            assert!(level_le(ctt, a, c).unwrap(), "transitivity");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn level_each_monotone_and_fun_uniform() {
        let (_reg, ctts) = test_ctts();
        for ctt in &ctts {
            for n in 0..4u64 {
                for m in n..4u64 {
                    assert!(level_le(ctt, &level_each(ctt, n), &level_each(ctt, m)).unwrap());
                }
                let f = level_fun(ctt, &level_each(ctt, n)).unwrap();
                let ds = dims(ctt);
                assert_eq!(f.keys().cloned().collect::<Vec<_>>(), ds);
                assert!(f.values().all(|&v| v == n));
            }
        }
    }
}
