//! Cartesian composition of data files and render scripts.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{ChartData, ChartInstance, RenderScript};

/// All `|data| x |scripts|` pairs of one chart type, data-major then by
/// script id.
pub fn compose(data: &[ChartData], scripts: &[RenderScript]) -> Result<Vec<ChartInstance>> {
    let Some(chart_type) = data
        .first()
        .map(|d| d.chart_type.as_str())
        .or_else(|| scripts.first().map(|s| s.chart_type.as_str()))
    else {
        return Ok(Vec::new());
    };
    for t in data
        .iter()
        .map(|d| &d.chart_type)
        .chain(scripts.iter().map(|s| &s.chart_type))
    {
        if t != chart_type {
            return Err(Error::MixedChartTypes(chart_type.to_string(), t.clone()));
        }
    }
    let mut ordered: Vec<&RenderScript> = scripts.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = Vec::with_capacity(data.len() * scripts.len());
    let mut seen = HashSet::new();
    for d in data {
        for s in &ordered {
            let inst = ChartInstance::pending(&d.id, &s.id, chart_type);
            if !seen.insert(inst.id.clone()) {
                return Err(Error::DuplicateIds(vec![inst.id]));
            }
            out.push(inst);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::style::style_at;
    use crate::model::IoContract;
    use serde_json::json;

    fn data(i: usize, t: &str) -> ChartData {
        let payload = json!({"i": i});
        ChartData {
            id: ChartData::content_id(t, &payload),
            chart_type: t.into(),
            topic: "x".into(),
            payload,
            qas: vec![],
        }
    }

    fn script(i: usize, t: &str) -> RenderScript {
        let source = format!("# {i}\nsys.argv[1]; sys.argv[2]\n");
        RenderScript {
            id: RenderScript::content_id(t, &source),
            chart_type: t.into(),
            backend_name: "matplotlib".into(),
            style: style_at(i, true),
            source,
            io_contract: IoContract::DataJsonThenOutPng,
        }
    }

    #[test]
    fn six_by_four() {
        let d: Vec<_> = (0..6).map(|i| data(i, "bar")).collect();
        let s: Vec<_> = (0..4).map(|i| script(i, "bar")).collect();
        let out = compose(&d, &s).unwrap();
        assert_eq!(out.len(), 24);
        let pairs: HashSet<_> = out.iter().map(|i| (&i.data_id, &i.script_id)).collect();
        assert_eq!(pairs.len(), 24);
        assert_eq!(out[0].data_id, d[0].id);
        assert!(out[..4].windows(2).all(|w| w[0].script_id < w[1].script_id));
    }

    #[test]
    fn one_by_one() {
        assert_eq!(
            compose(&[data(0, "pie")], &[script(0, "pie")])
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn mixed_types_rejected() {
        assert!(matches!(
            compose(&[data(0, "pie")], &[script(0, "bar")]),
            Err(Error::MixedChartTypes(..))
        ));
    }
}
