//! `etlab describe`: every curvature object and residual of one structure at
//! one point, as text or JSON. The debugging microscope.

use std::collections::BTreeMap;

use etlab_core::catalog;
use etlab_core::error::Result;
use etlab_core::structures::StructureEval;
use etlab_core::tensor::ComponentTensor;

use crate::{exit_code_for, EXIT_CONFIG_ERROR, EXIT_PASS};

fn matrix_json(t: &ComponentTensor<f64>) -> serde_json::Value {
    let n = t.dim();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| *t.get(&[i, j])).collect())
        .collect();
    serde_json::json!(rows)
}

fn rank3_json(t: &ComponentTensor<f64>) -> serde_json::Value {
    let n = t.dim();
    let v: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| *t.get(&[i, j, k])).collect())
                .collect()
        })
        .collect();
    serde_json::json!(v)
}

fn matrix_text(t: &ComponentTensor<f64>) -> String {
    let n = t.dim();
    let mut out = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:+.9e}", t.get(&[i, j]))).collect();
        out.push_str(&format!("    [{}]\n", row.join(", ")));
    }
    out
}

fn describe_result(
    name: &str,
    params: &BTreeMap<String, f64>,
    point: &[f64],
    jet_order: usize,
    json: bool,
) -> Result<String> {
    let target = catalog::build(name, params)?;
    target.structure.chart.check_interior(point)?;
    let eval = StructureEval::new(&target.structure, point, jet_order)?;
    let bundle = &eval.bundle;

    let g = bundle.g.values();
    let ricci = bundle.ricci.values();
    let scalar = bundle.scalar.value();
    let weyl = eval.weyl()?.values();
    let cotton = eval.cotton()?.values();
    let bach = bundle.bach()?.values();
    let t_tensor = eval.t_tensor()?.values();
    let grad_f = bundle.gradient(&eval.f_jet)?.values();
    let f_value = eval.f_jet.value();
    let h_value = eval.h_jet.value();

    let principal = eval.residual_principal()?;
    let trace = eval.residual_trace()?;
    let grad_h = eval.residual_grad_h()?;
    let case = eval.special_case_residual()?;
    let lemma_fc = eval.residual_lemma_fc()?;

    if json {
        let doc = serde_json::json!({
            "structure": target.name,
            "case": target.structure.case_tag.name(),
            "point": point,
            "jet_order": jet_order,
            "f": f_value,
            "h": h_value,
            "g": matrix_json(&g),
            "ricci": matrix_json(&ricci),
            "scalar_curvature": scalar,
            "weyl_max_abs": weyl.max_abs(),
            "cotton": rank3_json(&cotton),
            "cotton_max_abs": cotton.max_abs(),
            "bach": matrix_json(&bach),
            "t_tensor_max_abs": t_tensor.max_abs(),
            "grad_f": (0..point.len()).map(|i| *grad_f.get(&[i])).collect::<Vec<f64>>(),
            "residuals": {
                "principal": principal.residual.relative(),
                "trace": trace.residual.relative(),
                "grad_h": grad_h.residual.relative(),
                "case_principal": case.principal.residual.relative(),
                "case_trace": case.trace.residual.relative(),
                "lemma_fc": lemma_fc.residual.relative(),
            },
        });
        Ok(format!(
            "{}\n",
            serde_json::to_string_pretty(&doc).expect("describe serialization")
        ))
    } else {
        let mut out = String::new();
        out.push_str(&format!(
            "{} ({}) at {:?}, jet order {}\n",
            target.name,
            target.structure.case_tag.name(),
            point,
            jet_order
        ));
        out.push_str(&format!("  f = {f_value:+.12e}, h = {h_value:+.12e}\n"));
        out.push_str("  g =\n");
        out.push_str(&matrix_text(&g));
        out.push_str("  Ric =\n");
        out.push_str(&matrix_text(&ricci));
        out.push_str(&format!("  R = {scalar:+.12e}\n"));
        out.push_str(&format!(
            "  |W| = {:.6e}   |C| = {:.6e}   |B| = {:.6e}   |T| = {:.6e}\n",
            weyl.max_abs(),
            cotton.max_abs(),
            bach.max_abs(),
            t_tensor.max_abs()
        ));
        let grads: Vec<String> = (0..point.len())
            .map(|i| format!("{:+.6e}", grad_f.get(&[i])))
            .collect();
        out.push_str(&format!("  grad f = [{}]\n", grads.join(", ")));
        out.push_str("  residuals (relative):\n");
        out.push_str(&format!(
            "    principal      {:.3e}\n",
            principal.residual.relative()
        ));
        out.push_str(&format!("    trace          {:.3e}\n", trace.residual.relative()));
        out.push_str(&format!(
            "    grad_h         {:.3e}\n",
            grad_h.residual.relative()
        ));
        out.push_str(&format!(
            "    case_principal {:.3e}\n",
            case.principal.residual.relative()
        ));
        out.push_str(&format!(
            "    case_trace     {:.3e}\n",
            case.trace.residual.relative()
        ));
        out.push_str(&format!(
            "    lemma_fc       {:.3e}\n",
            lemma_fc.residual.relative()
        ));
        Ok(out)
    }
}

pub fn describe_command(
    name: &str,
    params: &[(String, f64)],
    point: &str,
    jet_order: usize,
    json: bool,
) -> i32 {
    let params: BTreeMap<String, f64> = params.iter().cloned().collect();
    let point: Vec<f64> = match point
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<f64>, _>>()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: malformed --point: {e}");
            return EXIT_CONFIG_ERROR;
        }
    };
    match describe_result(name, &params, &point, jet_order, json) {
        Ok(text) => {
            print!("{text}");
            EXIT_PASS
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
