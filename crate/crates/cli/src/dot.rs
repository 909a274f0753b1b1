//! Graphviz renderings of the quotient.

use std::path::Path;

use solenoidk::{QuotientPresentation, SubstitutionSystem};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum DotKind {
    /// Germs as nodes, `τ` as edges, non-separated pairs dashed.
    #[default]
    Automaton,
    /// Arcs and the germs gluing their ends, non-separated germs clustered.
    Presentation,
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Connected components of the non-separation graph, singletons dropped.
fn components(pres: &QuotientPresentation) -> Vec<Vec<usize>> {
    let n = pres.germs.len();
    let mut comp: Vec<usize> = (0..n).collect();
    fn root(comp: &mut [usize], mut i: usize) -> usize {
        while comp[i] != i {
            comp[i] = comp[comp[i]];
            i = comp[i];
        }
        i
    }
    for &(i, j) in &pres.nonsep {
        let (a, b) = (root(&mut comp, i), root(&mut comp, j));
        comp[a.max(b)] = a.min(b);
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = root(&mut comp, i);
        groups[r].push(i);
    }
    groups.into_iter().filter(|g| g.len() > 1).collect()
}

pub fn germ_automaton_dot(sys: &SubstitutionSystem) -> String {
    let pres = QuotientPresentation::new(sys);
    let clusters = pres.clusters();
    let mut out =
        String::from("digraph germ_automaton {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for (i, g) in pres.germs.iter().enumerate() {
        let member: Vec<String> = clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains(&i))
            .map(|(k, _)| k.to_string())
            .collect();
        let mut attrs = format!("label={}", quote(&g.render(sys)));
        if !member.is_empty() {
            attrs.push_str(&format!(
                ", xlabel={}",
                quote(&format!("cliques {}", member.join(",")))
            ));
        }
        out.push_str(&format!("  g{i} [{attrs}];\n"));
    }
    for (i, &j) in pres.tau.iter().enumerate() {
        out.push_str(&format!("  g{i} -> g{j} [label=\"τ\"];\n"));
    }
    for &(i, j) in &pres.nonsep {
        out.push_str(&format!(
            "  g{i} -> g{j} [dir=none, style=dashed, color=gray, constraint=false];\n"
        ));
    }
    out.push_str("}\n");
    out
}

pub fn presentation_dot(sys: &SubstitutionSystem) -> String {
    let pres = QuotientPresentation::new(sys);
    let mut out = String::from("digraph quotient {\n  rankdir=LR;\n");
    for &e in &pres.arcs {
        out.push_str(&format!(
            "  arc{e} [shape=box, label={}];\n",
            quote(sys.label(e).as_str())
        ));
    }
    let comps = components(&pres);
    let mut placed = vec![false; pres.germs.len()];
    for (k, c) in comps.iter().enumerate() {
        out.push_str(&format!(
            "  subgraph cluster_{k} {{\n    label=\"non-separated\";\n    style=dashed;\n"
        ));
        for &i in c {
            placed[i] = true;
            out.push_str(&format!(
                "    g{i} [shape=point, xlabel={}];\n",
                quote(&pres.germs[i].render(sys))
            ));
        }
        out.push_str("  }\n");
    }
    for (i, g) in pres.germs.iter().enumerate() {
        if !placed[i] {
            out.push_str(&format!(
                "  g{i} [shape=point, xlabel={}];\n",
                quote(&g.render(sys))
            ));
        }
    }
    // the germ (l, r) glues the end of arc l to the start of arc r
    for (i, g) in pres.germs.iter().enumerate() {
        out.push_str(&format!("  arc{} -> g{i} [arrowhead=none];\n", g.l));
        out.push_str(&format!("  g{i} -> arc{};\n", g.r));
    }
    out.push_str("}\n");
    out
}

pub fn render_dot(sys: &SubstitutionSystem, kind: DotKind) -> String {
    match kind {
        DotKind::Automaton => germ_automaton_dot(sys),
        DotKind::Presentation => presentation_dot(sys),
    }
}

pub fn export_dot(sys: &SubstitutionSystem, kind: DotKind, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render_dot(sys, kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use solenoidk::examples;

    fn count(s: &str, pat: &str) -> usize {
        s.matches(pat).count()
    }

    fn nodes(s: &str) -> usize {
        s.lines()
            .filter(|l| l.contains("[label=") && !l.contains("->"))
            .count()
    }

    #[test]
    fn aab_automaton_flows_into_ba() {
        let s = examples::aab_ab();
        let d = germ_automaton_dot(&s);
        assert_eq!(nodes(&d), 3);
        // germs sorted aa, ab, ba; τ sends all to g2
        for i in 0..3 {
            assert!(d.contains(&format!("g{i} -> g2 [label=\"τ\"]")), "{d}");
        }
        assert_eq!(count(&d, "style=dashed"), 2);
    }

    #[test]
    fn doubling_is_one_self_loop() {
        let d = germ_automaton_dot(&examples::two_solenoid());
        assert_eq!(nodes(&d), 1);
        assert!(d.contains("g0 -> g0 [label=\"τ\"]"));
        assert_eq!(count(&d, " -> "), 1);
    }

    #[test]
    fn ab_ab_germs_are_separated() {
        let d = germ_automaton_dot(&examples::ab_ab());
        assert_eq!(nodes(&d), 2);
        assert_eq!(count(&d, "style=dashed"), 0);
        assert_eq!(count(&presentation_dot(&examples::ab_ab()), "cluster_"), 0);
    }

    #[test]
    fn aab_presentation_clusters_all_germs() {
        let d = presentation_dot(&examples::aab_ab());
        assert_eq!(count(&d, "subgraph cluster_"), 1);
        assert_eq!(count(&d, "shape=box"), 2);
        assert!(d.starts_with("digraph") && d.ends_with("}\n"));
    }
}
