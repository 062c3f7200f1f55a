//! JSON views of weights and categories. Objects are built as
//! `serde_json::Value`, whose maps keep keys sorted, so output is
//! byte-deterministic for a fixed input.

use serde_json::{json, Value};

use crate::lattice::{chart_polytope, local_group_order, stacky_vectors, Weights};
use crate::morse::{CategoryData, GenId};
use crate::Result;

fn points(ps: &[Vec<crate::arith::Rational>]) -> Value {
    ps.iter().map(|p| p.iter().map(|r| r.to_string()).collect::<Vec<_>>()).collect()
}

pub fn weights_json(w: &Weights) -> Value {
    json!({
        "q": w.q(),
        "n": w.dim(),
        "lcm": w.lcm(),
        "prodq": w.prodq(),
        "scale": w.scale(),
    })
}

/// Weights, stacky vectors, chart vertices and local group orders.
pub fn info_json(w: &Weights) -> Result<Value> {
    let charts = (0..=w.dim())
        .map(|i| {
            let chart = chart_polytope(w, i)?;
            Ok(json!({
                "index": i,
                "vertices": points(&chart.vertices),
                "group_order": local_group_order(w, i)?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "weights": weights_json(w),
        "stacky_vectors": points(&stacky_vectors(w)),
        "charts": charts,
    }))
}

fn gen_json(g: &GenId) -> Value {
    json!({ "a": g.a, "b": g.b, "K": g.k })
}

/// The category as `{weights, base, chart, unit, objects, homs, products}`.
/// Generators appear in lexicographic `K` order within each `(a, b)`.
pub fn category_json(cat: &CategoryData) -> Value {
    let objects: Vec<Value> = cat.objects.iter().map(|o| json!({ "a": o.a, "Ka": o.ka })).collect();
    let homs: Vec<Value> = cat
        .homs
        .values()
        .flat_map(|h| h.gens.iter())
        .map(|g| {
            json!({
                "a": g.a,
                "b": g.b,
                "K": g.k.k(),
                "degree": g.degree,
                "v": g.v.as_ref().map(|v| v.iter().map(|r| r.to_string()).collect::<Vec<_>>()),
            })
        })
        .collect();
    let products: Vec<Value> = cat
        .products
        .iter()
        .map(|((g1, g2), p)| {
            json!({
                "src1": gen_json(g1),
                "src2": gen_json(g2),
                "dst": gen_json(&p.dst),
                "weight": p.weight,
                "approx": p.weight.to_float(),
            })
        })
        .collect();
    json!({
        "weights": weights_json(&cat.weights),
        "base": cat.base,
        "chart": cat.chart,
        "unit": cat.unit,
        "objects": objects,
        "homs": homs,
        "products": products,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse::build_category;

    #[test]
    fn category_json_shape() {
        let w = Weights::new(&[3, 2]).unwrap();
        let v = category_json(&build_category(&w, 0).unwrap());
        assert_eq!(v["objects"].as_array().unwrap().len(), 5);
        // 6 forward generators and 5 identities
        assert_eq!(v["homs"].as_array().unwrap().len(), 11);
        let p = v["products"]
            .as_array()
            .unwrap()
            .iter()
            .find(|p| p["src1"]["b"] == 2 && p["src2"]["a"] == 2 && p["src2"]["b"] == 4 && p["src1"]["a"] == 0)
            .unwrap();
        assert_eq!(p["dst"]["K"], json!([0, 2]));
        let cat = build_category(&w, 0).unwrap();
        let g = cat.hom(0, 2).gens[0].clone();
        let h = cat.hom(2, 4).gens[0].clone();
        let (_, weight) = crate::morse::compose(&w, &g, &h).unwrap();
        assert_eq!(p["weight"], serde_json::to_value(&weight).unwrap());
        assert!((p["approx"].as_f64().unwrap() - weight.to_float()).abs() < 1e-15);
    }

    #[test]
    fn info_json_shape() {
        let v = info_json(&Weights::new(&[1, 1, 2]).unwrap()).unwrap();
        assert_eq!(v["charts"][0]["vertices"], json!([["0", "0"], ["4", "0"], ["0", "2"]]));
        assert_eq!(v["charts"][2]["group_order"], json!(2));
        assert_eq!(v["weights"]["scale"], json!(4));
    }
}
