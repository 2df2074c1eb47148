//! Development scratchpad: prints exact facet data for the bundled
//! networks so expected values in the test suite can be pinned from an
//! independent computation.  Not part of the shipped interface.

use std::collections::BTreeSet;
use std::time::Instant;

use bellforge_core::linalg::dot;
use bellforge_core::linear::dd::facets_of_points;
use bellforge_core::linear::project::{project_via_vertices, scenario_vertices};
use bellforge_core::linear::{fm::fm_eliminate, fm::FmOptions, simplex_system, LinIneq, LinSystem};
use bellforge_core::moment::{build_basis, Basis, Correlator, Restriction};
use bellforge_core::ratio::{rat, Rat};
use bellforge_core::scenario::{parse_scenario, Scenario};
use num_traits::{One, Signed, Zero};

fn chsh() -> Scenario {
    parse_scenario(
        "[parties]\nA settings=2\nB settings=2\n[sources]\nL -> A,B\n",
    )
    .unwrap()
}

fn bilocal22() -> Scenario {
    parse_scenario(
        "[parties]\nA settings=2\nB settings=2\nC settings=2\n[sources]\nL1 -> A,B\nL2 -> B,C\n",
    )
    .unwrap()
}

fn bilocal33() -> Scenario {
    parse_scenario(
        "[parties]\nA settings=3\nB settings=2\nC settings=3\n[sources]\nL1 -> A,B\nL2 -> B,C\n",
    )
    .unwrap()
}

fn fourparty() -> Scenario {
    parse_scenario(
        "[parties]\nA settings=2\nB settings=2\nC settings=2\nD settings=2\n\
         [sources]\nL1 -> A,B,C\nL2 -> A,C,D\n",
    )
    .unwrap()
}

/// Positions of a list of rendered correlators in a basis.
fn pos(basis: &Basis, scenario: &Scenario, names: &[&str]) -> Vec<usize> {
    names
        .iter()
        .map(|n| {
            let c = Correlator::parse(n, scenario).unwrap();
            basis.position(&c).unwrap_or_else(|| panic!("{n} not in basis"))
        })
        .collect()
}

/// Builds a row `constant + sum coeff*corr >= 0` against a basis.
fn row(basis: &Basis, scenario: &Scenario, constant: i64, terms: &[(i64, &str)]) -> LinIneq {
    let mut coeffs = vec![Rat::zero(); basis.len()];
    coeffs[0] = rat(constant);
    for (k, name) in terms {
        let c = Correlator::parse(name, scenario).unwrap();
        let i = basis.position(&c).unwrap();
        coeffs[i] = rat(*k);
    }
    let mut r = LinIneq::new(coeffs);
    r.canonicalize();
    r
}

fn print_system(tag: &str, sys: &LinSystem, basis: &Basis, scenario: &Scenario) {
    println!("-- {tag}: {} rows", sys.rows.len());
    for r in &sys.rows {
        println!("   {}", r.render(basis, scenario));
    }
}

fn contains(sys: &LinSystem, probe: &LinIneq) -> bool {
    let key = probe.canonical_key();
    sys.rows.iter().any(|r| r.canonical_key() == key)
}

fn section_chsh() {
    let s = chsh();
    let basis = build_basis(&s, &Restriction::Full).unwrap();
    let verts = scenario_vertices(&s, &basis);
    println!("chsh: full basis {} coords, {} distinct vertices", basis.len(), verts.len());

    // Projection onto the four cross-party correlators.
    let keep4 = {
        let mut k = vec![0usize];
        k.extend(pos(&basis, &s, &["E[A0 B0]", "E[A0 B1]", "E[A1 B0]", "E[A1 B1]"]));
        k
    };
    let proj4 = project_via_vertices(&verts, &keep4, basis.len());
    println!("chsh: cross-correlator projection equalities = {}", proj4.equalities.len());
    print_system("cross-correlator facets", &proj4.inequalities, &basis, &s);

    // Same projection via FM from the simplex system.
    let sys = simplex_system(4);
    let fm_opts = FmOptions {
        hull_vertices: Some(verts.clone()),
        ..FmOptions::default()
    };
    let eliminate: Vec<usize> = (1..basis.len()).filter(|i| !keep4.contains(i)).collect();
    let t = Instant::now();
    let fm = fm_eliminate(&sys, &eliminate, &fm_opts).unwrap();
    println!(
        "chsh: fm route {} rows in {:?}, sets equal = {}",
        fm.system.rows.len(),
        t.elapsed(),
        fm.system.canonical_set() == proj4.inequalities.canonical_set()
    );

    // Marginals + correlators projection (singles and cross products).
    let keep9 = {
        let mut k = vec![0usize];
        k.extend(pos(
            &basis,
            &s,
            &["E[A0]", "E[A1]", "E[B0]", "E[B1]", "E[A0 B0]", "E[A0 B1]", "E[A1 B0]", "E[A1 B1]"],
        ));
        k
    };
    let proj9 = project_via_vertices(&verts, &keep9, basis.len());
    println!(
        "chsh: marginals+correlators projection facets = {} (equalities {})",
        proj9.inequalities.rows.len(),
        proj9.equalities.len()
    );

    // Intermediate stage: keep the A-pair term too.
    let keep6 = {
        let mut k = keep4.clone();
        k.extend(pos(&basis, &s, &["E[A0 A1]"]));
        k
    };
    let proj6 = project_via_vertices(&verts, &keep6, basis.len());
    print_system("intermediate (cross + A-pair) facets", &proj6.inequalities, &basis, &s);
    let eq2 = row(&basis, &s, 1, &[(-1, "E[A0 B0]"), (-1, "E[A1 B0]"), (1, "E[A0 A1]")]);
    let eq3 = row(&basis, &s, 1, &[(-1, "E[A0 B1]"), (1, "E[A1 B1]"), (-1, "E[A0 A1]")]);
    println!(
        "chsh: intermediate contains the two halves: {} {}",
        contains(&proj6.inequalities, &eq2),
        contains(&proj6.inequalities, &eq3)
    );
    let fm6 = fm_eliminate(
        &sys,
        &(1..basis.len()).filter(|i| !keep6.contains(i)).collect::<Vec<_>>(),
        &fm_opts,
    )
    .unwrap();
    println!(
        "chsh: fm intermediate {} rows, sets equal = {}",
        fm6.system.rows.len(),
        fm6.system.canonical_set() == proj6.inequalities.canonical_set()
    );
}

fn section_bilocal22() {
    let s = bilocal22();
    let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
    let verts = scenario_vertices(&s, &basis);
    println!("bilocal22: restricted basis {} coords, {} distinct vertices", basis.len(), verts.len());

    let keep: Vec<usize> = (0..basis.len()).collect();
    let t = Instant::now();
    let tprime = project_via_vertices(&verts, &keep, basis.len());
    println!(
        "bilocal22: T' facets = {} (equalities {}) in {:?}",
        tprime.inequalities.rows.len(),
        tprime.equalities.len(),
        t.elapsed()
    );
    print_system("T' facets", &tprime.inequalities, &basis, &s);

    // Paper-shaped probes: +-I - u - w - m <= 1 and +-J + u + w - m <= 1.
    let i_terms = ["E[A0 B0 C0]", "E[A0 B0 C1]", "E[A1 B0 C0]", "E[A1 B0 C1]"];
    let j_terms = ["E[A0 B1 C0]", "E[A0 B1 C1]", "E[A1 B1 C0]", "E[A1 B1 C1]"];
    let j_signs = [1i64, -1, -1, 1];
    for sign in [1i64, -1] {
        let mut terms: Vec<(i64, &str)> = i_terms.iter().map(|&t| (-sign, t)).collect();
        terms.push((1, "E[A0 A1]"));
        terms.push((1, "E[C0 C1]"));
        terms.push((1, "E[A0 A1 C0 C1]"));
        let probe = row(&basis, &s, 1, &terms);
        println!("bilocal22: T' contains I-row (sign {sign:+}): {}", contains(&tprime.inequalities, &probe));
        let mut terms: Vec<(i64, &str)> = j_terms
            .iter()
            .zip(j_signs)
            .map(|(&t, js)| (-sign * js, t))
            .collect();
        terms.push((-1, "E[A0 A1]"));
        terms.push((-1, "E[C0 C1]"));
        terms.push((1, "E[A0 A1 C0 C1]"));
        let probe = row(&basis, &s, 1, &terms);
        println!("bilocal22: T' contains J-row (sign {sign:+}): {}", contains(&tprime.inequalities, &probe));
    }
    for name in ["E[C0 C1]", "E[A0 A1]", "E[A0 A1 C0 C1]"] {
        let up = row(&basis, &s, 1, &[(-1, name)]);
        let dn = row(&basis, &s, 1, &[(1, name)]);
        println!(
            "bilocal22: cube rows for {name}: upper {} lower {}",
            contains(&tprime.inequalities, &up),
            contains(&tprime.inequalities, &dn)
        );
    }

    // Affine context: project out the C-pair and the product coordinate.
    let w = pos(&basis, &s, &["E[C0 C1]"])[0];
    let m = pos(&basis, &s, &["E[A0 A1 C0 C1]"])[0];
    let keep_ac: Vec<usize> = (0..basis.len()).filter(|&i| i != w && i != m).collect();
    let ac = project_via_vertices(&verts, &keep_ac, basis.len());
    println!("bilocal22: affine-context facets = {}", ac.inequalities.rows.len());
    print_system("affine context", &ac.inequalities, &basis, &s);
}

fn section_bilocal33() {
    let s = bilocal33();
    let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
    let verts = scenario_vertices(&s, &basis);
    println!("bilocal33: restricted basis {} coords, {} distinct vertices", basis.len(), verts.len());

    // Affine context first (smaller): drop C-pairs and the 9 products.
    let mut drop = BTreeSet::new();
    for (i, c) in basis.correlators().iter().enumerate() {
        let parties = c.parties();
        if parties == BTreeSet::from([2]) && c.vars().len() == 2 {
            drop.insert(i); // C-pair
        }
        if parties == BTreeSet::from([0, 2]) && c.vars().len() == 4 {
            drop.insert(i); // A-pair x C-pair product
        }
    }
    println!("bilocal33: dropping {} coords for the affine context", drop.len());
    let keep_ac: Vec<usize> = (0..basis.len()).filter(|i| !drop.contains(i)).collect();
    let t = Instant::now();
    let ac = project_via_vertices(&verts, &keep_ac, basis.len());
    println!(
        "bilocal33: affine-context facets = {} (equalities {}) in {:?}",
        ac.inequalities.rows.len(),
        ac.equalities.len(),
        t.elapsed()
    );

    // Probes in the affine context: 3 f2 >= 2|I|, 3 f1 >= 2|J|, f1+f2 <= 8,
    // written over A-pairs and triples.  f1 = 3 - u01 + u02 - u12,
    // f2 = 3 + u01 + u02 + u12.
    let i_terms: Vec<(i64, String)> = (0..3)
        .flat_map(|x| (0..3).map(move |z| (1i64, format!("E[A{x} B0 C{z}]"))))
        .collect();
    let j_terms: Vec<(i64, String)> = (0..3)
        .flat_map(|x| {
            (0..3).map(move |z| {
                let sgn = if (x + z) % 2 == 0 { 1i64 } else { -1 };
                (sgn, format!("E[A{x} B1 C{z}]"))
            })
        })
        .collect();
    // 3 f2 - 2 s I >= 0  <=>  9 + 3u01 + 3u02 + 3u12 - 2 s I >= 0.
    for sgn in [1i64, -1] {
        let mut terms: Vec<(i64, &str)> = vec![
            (3, "E[A0 A1]"),
            (3, "E[A0 A2]"),
            (3, "E[A1 A2]"),
        ];
        let it: Vec<(i64, String)> = i_terms.iter().map(|(c, t)| (-2 * sgn * c, t.clone())).collect();
        for (c, t) in &it {
            terms.push((*c, t.as_str()));
        }
        let probe = row(&basis, &s, 9, &terms);
        println!(
            "bilocal33: affine context contains 3f2 >= {}2I: {}",
            if sgn > 0 { "+" } else { "-" },
            contains(&ac.inequalities, &probe)
        );
        let mut terms: Vec<(i64, &str)> = vec![
            (-3, "E[A0 A1]"),
            (3, "E[A0 A2]"),
            (-3, "E[A1 A2]"),
        ];
        let jt: Vec<(i64, String)> = j_terms.iter().map(|(c, t)| (-2 * sgn * c, t.clone())).collect();
        for (c, t) in &jt {
            terms.push((*c, t.as_str()));
        }
        let probe = row(&basis, &s, 9, &terms);
        println!(
            "bilocal33: affine context contains 3f1 >= {}2J: {}",
            if sgn > 0 { "+" } else { "-" },
            contains(&ac.inequalities, &probe)
        );
    }
    // f1 + f2 <= 8 <=> 8 - 6 - 2u02 >= 0 <=> 1 - u02 >= 0.
    let probe = row(&basis, &s, 1, &[(-1, "E[A0 A2]")]);
    println!("bilocal33: affine context contains u02 <= 1: {}", contains(&ac.inequalities, &probe));
}

fn section_bilocal33_tprime() {
    let s = bilocal33();
    let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
    let verts = scenario_vertices(&s, &basis);
    let keep: Vec<usize> = (0..basis.len()).collect();
    let t = Instant::now();
    let tprime = project_via_vertices(&verts, &keep, basis.len());
    println!(
        "bilocal33: T' facets = {} (equalities {}) in {:?}",
        tprime.inequalities.rows.len(),
        tprime.equalities.len(),
        t.elapsed()
    );
    // The two seed rows of the three-setting chain, written over the basis:
    // 4J - 3<f1> + <f1 C0C1> - <f1 C0C2> + <f1 C1C2> <= 0 and
    // 4I - 3<f2> - <f2 C0C1> - <f2 C0C2> - <f2 C1C2> <= 0.
    let f1 = [(-1i64, "E[A0 A1]"), (1, "E[A0 A2]"), (-1, "E[A1 A2]")];
    let f2 = [(1i64, "E[A0 A1]"), (1, "E[A0 A2]"), (1, "E[A1 A2]")];
    let pair_name = |k: usize, l: usize, ai: &str| -> String {
        let a = ai.strip_prefix("E[").unwrap().strip_suffix("]").unwrap();
        format!("E[{a} C{k} C{l}]")
    };
    // Builds +-(3 + f)-weighted sums: coefficient list for <f g> where g is
    // a +-1 combination of C-pairs, remembering f carries constant 3.
    let chain_row = |j_side: bool| -> LinIneq {
        let (f, g, obs): (&[(i64, &str)], [( (usize, usize), i64); 3], &Vec<(i64, String)>) = if j_side {
            (&f1, [((0, 1), 1), ((0, 2), -1), ((1, 2), 1)], &{
                let v: Vec<(i64, String)> = (0..3)
                    .flat_map(|x| {
                        (0..3).map(move |z| {
                            let sgn = if (x + z) % 2 == 0 { 4i64 } else { -4 };
                            (sgn, format!("E[A{x} B1 C{z}]"))
                        })
                    })
                    .collect();
                v
            })
        } else {
            (&f2, [((0, 1), -1), ((0, 2), -1), ((1, 2), -1)], &{
                let v: Vec<(i64, String)> = (0..3)
                    .flat_map(|x| (0..3).map(move |z| (4i64, format!("E[A{x} B0 C{z}]"))))
                    .collect();
                v
            })
        };
        let mut coeffs = vec![Rat::zero(); basis.len()];
        // observable part (4J or 4I), negated because rows are ">= 0".
        for (c, name) in obs {
            let i = basis.position(&Correlator::parse(name, &s).unwrap()).unwrap();
            coeffs[i] = rat(-c);
        }
        // -(-3 <f>) = +3<f> with <f> = 3 + pairs: constant 9, pairs 3.
        coeffs[0] = rat(9);
        for (c, name) in f {
            let i = basis.position(&Correlator::parse(name, &s).unwrap()).unwrap();
            coeffs[i] += rat(3 * c);
        }
        // -(sum_g sgn <f g>) where <f g> = 3 w_kl + sum_pairs c E[pair C..].
        for ((k, l), gs) in g {
            let wi = basis
                .position(&Correlator::parse(&format!("E[C{k} C{l}]"), &s).unwrap())
                .unwrap();
            coeffs[wi] += rat(-3 * gs);
            for (c, name) in f {
                let i = basis
                    .position(&Correlator::parse(&pair_name(k, l, name), &s).unwrap())
                    .unwrap();
                coeffs[i] += rat(-gs * c);
            }
        }
        let mut r = LinIneq::new(coeffs);
        r.canonicalize();
        r
    };
    let a21 = chain_row(true);
    let a22 = chain_row(false);
    println!(
        "bilocal33: T' contains J-chain row: {}",
        contains(&tprime.inequalities, &a21)
    );
    println!(
        "bilocal33: T' contains I-chain row: {}",
        contains(&tprime.inequalities, &a22)
    );
    for name in ["E[C0 C1]", "E[C0 C2]", "E[C1 C2]"] {
        let up = row(&basis, &s, 1, &[(-1, name)]);
        println!(
            "bilocal33: T' contains {name} <= 1: {}",
            contains(&tprime.inequalities, &up)
        );
    }
}

fn section_fourparty() {
    let s = fourparty();
    let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
    let verts = scenario_vertices(&s, &basis);
    println!("fourparty: restricted basis {} coords, {} distinct vertices", basis.len(), verts.len());
    let keep: Vec<usize> = (0..basis.len()).collect();
    let t = Instant::now();
    let tprime = project_via_vertices(&verts, &keep, basis.len());
    println!(
        "fourparty: T' facets = {} (equalities {}) in {:?}",
        tprime.inequalities.rows.len(),
        tprime.equalities.len(),
        t.elapsed()
    );
    // +-I - b + d + m <= 1 and +-J + b - d + m <= 1 with b = E[B0 B1],
    // d = E[D0 D1], m = E[B0 B1 D0 D1],
    // I = -E[A1 B0 C0 D0]-E[A1 B0 C0 D1]+E[A1 B1 C0 D0]+E[A1 B1 C0 D1],
    // J = +E[A0 B0 C1 D0]-E[A0 B0 C1 D1]+E[A0 B1 C1 D0]-E[A0 B1 C1 D1].
    let i_terms = [
        (-1i64, "E[A1 B0 C0 D0]"),
        (-1, "E[A1 B0 C0 D1]"),
        (1, "E[A1 B1 C0 D0]"),
        (1, "E[A1 B1 C0 D1]"),
    ];
    let j_terms = [
        (1i64, "E[A0 B0 C1 D0]"),
        (-1, "E[A0 B0 C1 D1]"),
        (1, "E[A0 B1 C1 D0]"),
        (-1, "E[A0 B1 C1 D1]"),
    ];
    for sgn in [1i64, -1] {
        let mut terms: Vec<(i64, &str)> = i_terms.iter().map(|&(c, t)| (-sgn * c, t)).collect();
        terms.push((1, "E[B0 B1]"));
        terms.push((-1, "E[D0 D1]"));
        terms.push((-1, "E[B0 B1 D0 D1]"));
        let probe = row(&basis, &s, 1, &terms);
        println!(
            "fourparty: T' contains I-row (sign {sgn:+}): {}",
            contains(&tprime.inequalities, &probe)
        );
        let mut terms: Vec<(i64, &str)> = j_terms.iter().map(|&(c, t)| (-sgn * c, t)).collect();
        terms.push((-1, "E[B0 B1]"));
        terms.push((1, "E[D0 D1]"));
        terms.push((-1, "E[B0 B1 D0 D1]"));
        let probe = row(&basis, &s, 1, &terms);
        println!(
            "fourparty: T' contains J-row (sign {sgn:+}): {}",
            contains(&tprime.inequalities, &probe)
        );
    }
}

/// Reduced coordinate hull: vertices mapped to (1, functionals..., kept
/// correlators...), then the facets of that image.
struct Reduced {
    names: Vec<String>,
    verts: Vec<Vec<Rat>>,
    facets: LinSystem,
    equalities: usize,
}

fn reduce(
    basis: &Basis,
    scenario: &Scenario,
    verts: &[Vec<Rat>],
    funcs: &[(&str, &[(i64, &str)])],
    kept: &[&str],
) -> Reduced {
    let width = 1 + funcs.len() + kept.len();
    let mut names = vec!["1".to_string()];
    let mut maps: Vec<Vec<Rat>> = Vec::new();
    for (name, terms) in funcs {
        names.push((*name).to_string());
        let mut v = vec![Rat::zero(); basis.len()];
        for (k, corr) in *terms {
            let c = Correlator::parse(corr, scenario).unwrap();
            v[basis.position(&c).unwrap()] = rat(*k);
        }
        maps.push(v);
    }
    for corr in kept {
        names.push((*corr).to_string());
        let mut v = vec![Rat::zero(); basis.len()];
        let c = Correlator::parse(corr, scenario).unwrap();
        v[basis.position(&c).unwrap()] = Rat::one();
        maps.push(v);
    }
    let mut set: BTreeSet<Vec<Rat>> = BTreeSet::new();
    for vert in verts {
        let mut img = Vec::with_capacity(width);
        img.push(Rat::one());
        for map in &maps {
            img.push(dot(map, vert));
        }
        set.insert(img);
    }
    let pts: Vec<Vec<Rat>> = set.into_iter().collect();
    let fe = facets_of_points(&pts, width);
    Reduced {
        names,
        verts: pts,
        facets: LinSystem::new(width, fe.facets),
        equalities: fe.equalities.len(),
    }
}

fn render_reduced(r: &LinIneq, names: &[String]) -> String {
    let mut out = String::new();
    for (i, c) in r.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = if c.abs() == rat(1) && i != 0 {
            names[i].clone()
        } else if i == 0 {
            format!("{c}").trim_start_matches('-').to_string()
        } else {
            format!("{}*{}", format!("{c}").trim_start_matches('-'), names[i])
        };
        if out.is_empty() {
            if c < &Rat::zero() {
                out.push('-');
            }
        } else {
            out.push_str(if c < &Rat::zero() { " - " } else { " + " });
        }
        out.push_str(&mag);
    }
    format!("{out} >= 0")
}

fn rrow(width: usize, constant: i64, terms: &[(i64, usize)]) -> LinIneq {
    let mut coeffs = vec![Rat::zero(); width];
    coeffs[0] = rat(constant);
    for &(k, i) in terms {
        coeffs[i] = rat(k);
    }
    let mut r = LinIneq::new(coeffs);
    r.canonicalize();
    r
}

fn section_reduced() {
    // bilocal22 in (1, I, J, u, w, m).
    let s = bilocal22();
    let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
    let verts = scenario_vertices(&s, &basis);
    let i22: &[(i64, &str)] = &[
        (1, "E[A0 B0 C0]"),
        (1, "E[A1 B0 C0]"),
        (1, "E[A0 B0 C1]"),
        (1, "E[A1 B0 C1]"),
    ];
    let j22: &[(i64, &str)] = &[
        (1, "E[A0 B1 C0]"),
        (-1, "E[A0 B1 C1]"),
        (-1, "E[A1 B1 C0]"),
        (1, "E[A1 B1 C1]"),
    ];
    let red = reduce(
        &basis,
        &s,
        &verts,
        &[("I", i22), ("J", j22)],
        &["E[A0 A1]", "E[C0 C1]", "E[A0 A1 C0 C1]"],
    );
    println!(
        "red22: {} reduced vertices, {} facets, {} equalities",
        red.verts.len(),
        red.facets.rows.len(),
        red.equalities
    );
    for r in &red.facets.rows {
        println!("   {}", render_reduced(r, &red.names));
    }
    // Paper rows: +-I - u - w - m <= 1 and +-J + u + w - m <= 1.
    for sgn in [1i64, -1] {
        let tea = rrow(6, 1, &[(-sgn, 1), (1, 3), (1, 4), (1, 5)]);
        let teb = rrow(6, 1, &[(-sgn, 2), (-1, 3), (-1, 4), (1, 5)]);
        println!(
            "red22: contains TEa({sgn:+}) {} TEb({sgn:+}) {}",
            contains(&red.facets, &tea),
            contains(&red.facets, &teb)
        );
    }

    // fourparty in (1, I, J, b, d, m).
    let s = fourparty();
    let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
    let verts = scenario_vertices(&s, &basis);
    let i4: &[(i64, &str)] = &[
        (-1, "E[A1 B0 C0 D0]"),
        (-1, "E[A1 B0 C0 D1]"),
        (1, "E[A1 B1 C0 D0]"),
        (1, "E[A1 B1 C0 D1]"),
    ];
    let j4: &[(i64, &str)] = &[
        (1, "E[A0 B0 C1 D0]"),
        (-1, "E[A0 B0 C1 D1]"),
        (1, "E[A0 B1 C1 D0]"),
        (-1, "E[A0 B1 C1 D1]"),
    ];
    let red = reduce(
        &basis,
        &s,
        &verts,
        &[("I", i4), ("J", j4)],
        &["E[B0 B1]", "E[D0 D1]", "E[B0 B1 D0 D1]"],
    );
    println!(
        "red4: {} reduced vertices, {} facets, {} equalities",
        red.verts.len(),
        red.facets.rows.len(),
        red.equalities
    );
    for r in &red.facets.rows {
        println!("   {}", render_reduced(r, &red.names));
    }
    for sgn in [1i64, -1] {
        let ia = rrow(6, 1, &[(-sgn, 1), (1, 3), (-1, 4), (-1, 5)]);
        let ja = rrow(6, 1, &[(-sgn, 2), (-1, 3), (1, 4), (-1, 5)]);
        println!(
            "red4: contains I-row({sgn:+}) {} J-row({sgn:+}) {}",
            contains(&red.facets, &ia),
            contains(&red.facets, &ja)
        );
    }

    // bilocal33 in (1, I, J, u01, u02, u12, w01, w02, w12, m[9]).
    let s = bilocal33();
    let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
    let verts = scenario_vertices(&s, &basis);
    let mut i33v: Vec<(i64, &str)> = Vec::new();
    let mut j33v: Vec<(i64, &str)> = Vec::new();
    let inames = [
        "E[A0 B0 C0]", "E[A0 B0 C1]", "E[A0 B0 C2]",
        "E[A1 B0 C0]", "E[A1 B0 C1]", "E[A1 B0 C2]",
        "E[A2 B0 C0]", "E[A2 B0 C1]", "E[A2 B0 C2]",
    ];
    let jnames = [
        "E[A0 B1 C0]", "E[A0 B1 C1]", "E[A0 B1 C2]",
        "E[A1 B1 C0]", "E[A1 B1 C1]", "E[A1 B1 C2]",
        "E[A2 B1 C0]", "E[A2 B1 C1]", "E[A2 B1 C2]",
    ];
    for x in 0..3usize {
        for z in 0..3usize {
            i33v.push((1, inames[3 * x + z]));
            let sign = if (x + z) % 2 == 0 { 1 } else { -1 };
            j33v.push((sign, jnames[3 * x + z]));
        }
    }
    let kept33 = [
        "E[A0 A1]", "E[A0 A2]", "E[A1 A2]",
        "E[C0 C1]", "E[C0 C2]", "E[C1 C2]",
        "E[A0 A1 C0 C1]", "E[A0 A1 C0 C2]", "E[A0 A1 C1 C2]",
        "E[A0 A2 C0 C1]", "E[A0 A2 C0 C2]", "E[A0 A2 C1 C2]",
        "E[A1 A2 C0 C1]", "E[A1 A2 C0 C2]", "E[A1 A2 C1 C2]",
    ];
    let t = Instant::now();
    let red = reduce(&basis, &s, &verts, &[("I", &i33v), ("J", &j33v)], &kept33);
    println!(
        "red33: {} reduced vertices, {} facets, {} equalities in {:?}",
        red.verts.len(),
        red.facets.rows.len(),
        red.equalities,
        t.elapsed()
    );
    for r in &red.facets.rows {
        println!("   {}", render_reduced(r, &red.names));
    }
    // A21 as >= 0 over (..., u01@3, u02@4, u12@5, w01@6, w02@7, w12@8,
    // m[01,01]@9, m[01,02]@10, m[01,12]@11, m[02,*]@12..14, m[12,*]@15..17).
    let a21 = rrow(
        18,
        9,
        &[
            (-4, 2),
            (-3, 3), (3, 4), (-3, 5),
            (-3, 6), (3, 7), (-3, 8),
            (1, 9), (-1, 10), (1, 11),
            (-1, 12), (1, 13), (-1, 14),
            (1, 15), (-1, 16), (1, 17),
        ],
    );
    let a22 = rrow(
        18,
        9,
        &[
            (-4, 1),
            (3, 3), (3, 4), (3, 5),
            (3, 6), (3, 7), (3, 8),
            (1, 9), (1, 10), (1, 11),
            (1, 12), (1, 13), (1, 14),
            (1, 15), (1, 16), (1, 17),
        ],
    );
    println!(
        "red33: contains A21 {} A22 {}",
        contains(&red.facets, &a21),
        contains(&red.facets, &a22)
    );
    for sgn in [1i64, -1] {
        let a23 = rrow(18, 9, &[(-2 * sgn, 1), (3, 3), (3, 4), (3, 5)]);
        let a24 = rrow(18, 9, &[(-2 * sgn, 2), (-3, 3), (3, 4), (-3, 5)]);
        println!(
            "red33: contains A23({sgn:+}) {} A24({sgn:+}) {}",
            contains(&red.facets, &a23),
            contains(&red.facets, &a24)
        );
    }
    let a25 = rrow(18, 1, &[(-1, 4)]);
    println!("red33: contains A25 (u02 <= 1): {}", contains(&red.facets, &a25));
}

fn main() {
    let section = std::env::args().nth(1).unwrap_or_else(|| "all".into());
    match section.as_str() {
        "chsh" => section_chsh(),
        "bilocal22" => section_bilocal22(),
        "bilocal33" => section_bilocal33(),
        "bilocal33t" => section_bilocal33_tprime(),
        "fourparty" => section_fourparty(),
        "reduced" => section_reduced(),
        _ => {
            section_chsh();
            section_bilocal22();
            section_bilocal33();
            section_bilocal33_tprime();
            section_fourparty();
            section_reduced();
        }
    }
}
