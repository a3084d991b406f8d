//! A 50-tree English-like grammar with attachment ambiguity.

use rcgp::lexicon::Lexicon;
use rcgp::pipeline::Resources;
use rcgp::semantics::ClassTable;
use rcgp::tree::{ElementaryTree, Grammar, NodeKind, TreeNode, TreeType};

fn fs(s: &str) -> rcgp::FeatureStructure {
    s.parse().unwrap()
}

fn anchor(cat: &str) -> TreeNode {
    TreeNode::new(NodeKind::Anchor, cat)
}

fn subst(cat: &str, top: &str) -> TreeNode {
    TreeNode::new(NodeKind::Substitution, cat).with_top(fs(top))
}

fn foot(cat: &str) -> TreeNode {
    TreeNode::new(NodeKind::Foot, cat)
}

fn node(cat: &str, children: Vec<TreeNode>) -> TreeNode {
    TreeNode::internal(cat, children)
}

/// Verb frames, each in a singular and a plural variant (agreement between
/// subject and verb).
fn verb_frames(num: &str) -> Vec<(String, TreeNode)> {
    let subj = || subst("NP", &format!("[i=?x,num={num}]"));
    let v = || anchor("V").with_top(fs(&format!("[num={num}]")));
    vec![
        ("intrans", node("S", vec![subj(), node("VP", vec![v()])])),
        ("trans", node("S", vec![subj(), node("VP", vec![v(), subst("NP", "[i=?y]")])])),
        ("ditrans", node("S", vec![subj(), node("VP", vec![v(), subst("NP", "[i=?y]"), subst("NP", "[i=?z]")])])),
        ("scomp", node("S", vec![subj(), node("VP", vec![v(), subst("S", "[]")])])),
        ("ppcomp", node("S", vec![subj(), node("VP", vec![v(), subst("PP", "[]")])])),
        ("npcomp_pp", node("S", vec![subj(), node("VP", vec![v(), subst("NP", "[i=?y]"), subst("PP", "[]")])])),
        ("topic", node("S", vec![subst("NP", "[i=?y]"), node("S", vec![subj(), node("VP", vec![v()])])])),
        ("particle", node("S", vec![subj(), node("VP", vec![v(), node("Prt", vec![]), subst("NP", "[i=?y]")])])),
        ("resultative", node("S", vec![subj(), node("VP", vec![v(), subst("NP", "[i=?y]"), subst("AP", "[]")])])),
        ("inverted", node("S", vec![node("VP", vec![v()]), subj()])),
    ]
    .into_iter()
    .map(|(n, t)| (format!("{n}_{num}"), t))
    .collect()
}

pub fn bench_resources() -> Resources {
    let mut trees: Vec<ElementaryTree> = Vec::new();
    let mut add = |name: &str, family: &str, tt: TreeType, root: TreeNode| trees.push(ElementaryTree::new(name, family, tt, root));
    for num in ["sg", "pl"] {
        for (name, t) in verb_frames(num) {
            add(&name, &format!("Verb_{num}"), TreeType::Initial, t);
        }
        // nouns: bare, with complement, and as modifiers
        add(&format!("noun_{num}"), &format!("Noun_{num}"), TreeType::Initial, node("NP", vec![node("N", vec![anchor("N").with_top(fs(&format!("[num={num}]")))])]).with_top(fs("[i=?x]")));
        add(&format!("noun_pp_{num}"), &format!("Noun_{num}"), TreeType::Initial, node("NP", vec![node("N", vec![anchor("N")]), subst("PP", "[]")]).with_top(fs("[i=?x]")));
        add(&format!("noun_mod_{num}"), &format!("Noun_{num}"), TreeType::Auxiliary, node("N", vec![anchor("N"), foot("N")]));
        add(&format!("det_{num}"), &format!("Det_{num}"), TreeType::Auxiliary, node("NP", vec![anchor("D"), foot("NP")]));
        add(&format!("det_n_{num}"), &format!("Det_{num}"), TreeType::Auxiliary, node("N", vec![anchor("D"), foot("N")]));
    }
    // modifiers
    add("adj_n", "Adj", TreeType::Auxiliary, node("N", vec![anchor("A"), foot("N")]));
    add("adj_np", "Adj", TreeType::Auxiliary, node("NP", vec![anchor("A"), foot("NP")]));
    add("adj_pred", "Adj", TreeType::Initial, node("AP", vec![anchor("A")]));
    add("pp_np", "Prep", TreeType::Auxiliary, node("NP", vec![foot("NP"), node("PP", vec![anchor("P"), subst("NP", "[]")])]));
    add("pp_vp", "Prep", TreeType::Auxiliary, node("VP", vec![foot("VP"), node("PP", vec![anchor("P"), subst("NP", "[]")])]));
    add("pp_s", "Prep", TreeType::Auxiliary, node("S", vec![foot("S"), node("PP", vec![anchor("P"), subst("NP", "[]")])]));
    add("pp_front", "Prep", TreeType::Auxiliary, node("S", vec![node("PP", vec![anchor("P"), subst("NP", "[]")]), foot("S")]));
    add("pp_arg", "Prep", TreeType::Initial, node("PP", vec![anchor("P"), subst("NP", "[]")]));
    add("pp_n", "Prep", TreeType::Auxiliary, node("N", vec![foot("N"), node("PP", vec![anchor("P"), subst("NP", "[]")])]));
    add("adv_vp_r", "Adv", TreeType::Auxiliary, node("VP", vec![foot("VP"), anchor("Adv")]));
    add("adv_vp_l", "Adv", TreeType::Auxiliary, node("VP", vec![anchor("Adv"), foot("VP")]));
    add("adv_s_r", "Adv", TreeType::Auxiliary, node("S", vec![foot("S"), anchor("Adv")]));
    add("adv_s_l", "Adv", TreeType::Auxiliary, node("S", vec![anchor("Adv"), foot("S")]));
    add("conj_s", "Conj", TreeType::Auxiliary, node("S", vec![foot("S"), anchor("Conj"), subst("S", "[]")]));
    add("conj_np", "Conj", TreeType::Auxiliary, node("NP", vec![foot("NP"), anchor("Conj"), subst("NP", "[]")]));
    add("conj_vp", "Conj", TreeType::Auxiliary, node("VP", vec![foot("VP"), anchor("Conj"), node("VP", vec![subst("V", "[]")])]));
    add("rel_np", "Rel", TreeType::Auxiliary, node("NP", vec![foot("NP"), node("RC", vec![anchor("Rel"), node("VP", vec![subst("V", "[]")])])]));
    add("aux_vp", "Aux", TreeType::Auxiliary, node("VP", vec![anchor("Aux"), foot("VP")]));
    add("name_np", "Name", TreeType::Initial, anchor("NP").with_top(fs("[i=?x]")));
    add("verb_bare", "Verb_sg", TreeType::Initial, node("V", vec![anchor("V")]));
    assert_eq!(trees.len(), 50);
    let grammar = Grammar::new("S", trees).unwrap();

    let morph = "\
the the []
a a [num=sg]
old old []
man man [num=sg]
saw see [num=sg]
saw saw [num=sg]
dog dog [num=sg]
with with []
telescope telescope [num=sg]
yesterday yesterday []
";
    let mut lemma = String::new();
    let mut entry = |e: &str, cat: &str, fam: &str, sem: &str| {
        lemma.push_str(&format!("*ENTRY: {e}\n*CAT: {cat}\n*FAM: {fam}\n"));
        if !sem.is_empty() {
            lemma.push_str(&format!("*SEM: {sem}\n"));
        }
        lemma.push('\n');
    };
    for num in ["sg", "pl"] {
        entry("the", "d", &format!("Det_{num}"), "");
    }
    entry("a", "d", "Det_sg", "");
    entry("old", "a", "Adj", "UnaryRel[pred=old]");
    entry("man", "n", "Noun_sg", "UnaryRel[pred=man]");
    entry("see", "v", "Verb_sg", "BinaryRel[pred=see]");
    entry("saw", "n", "Noun_sg", "UnaryRel[pred=saw]");
    entry("dog", "n", "Noun_sg", "UnaryRel[pred=dog]");
    entry("with", "p", "Prep", "UnaryRel[pred=with]");
    entry("telescope", "n", "Noun_sg", "UnaryRel[pred=telescope]");
    entry("yesterday", "adv", "Adv", "UnaryRel[pred=yesterday]");
    entry("yesterday", "n", "Noun_sg", "UnaryRel[pred=yesterday]");
    Resources { grammar, lexicon: Lexicon::from_text(morph, &lemma).unwrap(), classes: ClassTable::builtin() }
}

pub const BENCH_SENTENCE: &str = "the old man saw the dog with a telescope yesterday";
