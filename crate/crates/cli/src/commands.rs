use std::path::Path;
use std::time::Duration;

use fairmap_core::clustering::{ClusterMethod, ClusterParams, Metric};
use fairmap_core::cover::CoverParams;
use fairmap_core::error::{Error, Result};
use fairmap_core::fairness::{
    build_fairness_direction, corrected_concept_table, default_concept_table, load_concept_table,
    save_concept_table, DirectionFile, FairnessDirection,
};
use fairmap_core::ingest::{
    corpus_labels, fetch_embeddings, load_corpus, load_embeddings, save_corpus, save_embeddings,
    CorpusRecord, EmbeddingFormat, EndpointConfig, RetryPolicy,
};
use fairmap_core::nerve::separation_report;
use fairmap_core::pipeline::{run_mapper, sha256_hex_file, LensSpec, PipelineParams, RunMetadata};
use fairmap_core::render::{
    colorize, load_graph_file, recolor, save_graph_file, to_complex, to_dot, to_html_report,
    ColorMap, ColorScale,
};
use fairmap_core::synthetic::{circle_cloud, two_blob_cloud};
use fairmap_core::vector::{project_lens, Vector};

use crate::output::say;
use crate::{
    AnalyzeArgs, BuiltinTable, Cli, Clusterer, ConceptsArgs, DirectionArgs, EmbedArgs, EmbedFormat,
    FixtureKind, GenFixtureArgs, MapArgs, MetricArg, RenderArgs, RenderFormat,
};

impl From<EmbedFormat> for EmbeddingFormat {
    fn from(f: EmbedFormat) -> Self {
        match f {
            EmbedFormat::Bin => EmbeddingFormat::Binary,
            EmbedFormat::Txt => EmbeddingFormat::Text,
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn embed(cli: &Cli, args: &EmbedArgs) -> Result<()> {
    let records = load_corpus(&args.corpus)?;
    if records.is_empty() {
        return Err(Error::EmptyInput(format!(
            "empty corpus {}",
            args.corpus.display()
        )));
    }
    let config = EndpointConfig {
        base_url: args.endpoint.clone(),
        model: args.model.clone(),
        auth_token_env_var: args.token_env.clone(),
        max_concurrent_requests: args.max_concurrent,
        retry: RetryPolicy {
            max_attempts: args.retries,
            base_backoff: Duration::from_millis(250),
        },
        batch_size: args.batch_size,
    };
    if cli.verbose {
        eprintln!("embedding {} records via {}", records.len(), args.endpoint);
    }
    let (cloud, stats) = fetch_embeddings(&records, &config, &args.cache)?;
    save_embeddings(&cloud, &args.model, &args.out, args.format.into())?;
    say(format!(
        "embedded {} records, dim {}, cache hit ratio {:.2}",
        cloud.len(),
        cloud.dim(),
        stats.hit_ratio()
    ));
    Ok(())
}

pub fn direction(cli: &Cli, args: &DirectionArgs) -> Result<()> {
    let (cloud, model) = load_embeddings(&args.embeddings)?;
    let mut pairs = match &args.concepts {
        Some(path) => load_concept_table(path)?,
        None => match args.builtin {
            BuiltinTable::Default => default_concept_table(),
            BuiltinTable::Corrected => corrected_concept_table(),
        },
    };
    for pair in pairs.iter_mut() {
        pair.resolve_from_cloud(&cloud).map_err(|e| match e {
            Error::UnknownRecord(text) => Error::UnknownRecord(format!(
                "concept sentence `{text}` not found in {}",
                args.embeddings.display()
            )),
            other => other,
        })?;
    }
    let fd: FairnessDirection = build_fairness_direction(&pairs, args.normalize_concepts)?;
    DirectionFile::new(&fd, model, args.normalize_concepts).save(&args.out)?;
    if cli.verbose {
        eprintln!("direction built from {} concept pairs", pairs.len());
    }
    say(format!("raw_norm {}", fd.raw_norm));
    Ok(())
}

/// Documented CLI bound, tighter than the library's `overlap < 1`.
const MAX_OVERLAP: f64 = 0.95;

pub fn map(cli: &Cli, args: &MapArgs) -> Result<()> {
    if !(args.overlap >= 0.0 && args.overlap < MAX_OVERLAP) {
        return Err(Error::InvalidParam(format!(
            "overlap must lie in [0, {MAX_OVERLAP}), got {}",
            args.overlap
        )));
    }
    let (cloud, model) = load_embeddings(&args.embeddings)?;
    let direction_file = DirectionFile::load(&args.direction)?;
    if !cloud.is_empty() && direction_file.dim != cloud.dim() {
        return Err(Error::Dimension {
            expected: cloud.dim(),
            found: direction_file.dim,
            context: format!("direction file {}", args.direction.display()),
        });
    }
    let lens = project_lens(&cloud, &direction_file.direction)?;

    let params = PipelineParams {
        cover: CoverParams {
            n_intervals: args.intervals,
            overlap: args.overlap,
        },
        cluster: ClusterParams {
            method: match args.clusterer {
                Clusterer::SingleLinkageGap => ClusterMethod::SingleLinkageGap,
                Clusterer::Dbscan => ClusterMethod::Dbscan,
            },
            num_bins: args.bins,
            eps: args.eps,
            min_pts: args.min_pts,
            metric: match args.metric {
                MetricArg::Euclidean => Metric::Euclidean,
                MetricArg::Cosine => Metric::CosineDistance,
            },
        },
        max_dim: args.max_dim,
        normalize_points: args.normalize_points,
        threads: cli.threads,
    };
    let complex = run_mapper(&cloud, &lens, &params)?;

    let scale = if args.pinned_scale {
        ColorScale::Pinned { lo: -1.0, hi: 1.0 }
    } else {
        ColorScale::Observed
    };
    let metadata = RunMetadata {
        tool: RunMetadata::tool_string(),
        lens: LensSpec {
            kind: "cosine".into(),
            source_sha256: Some(sha256_hex_file(&args.direction)?),
        },
        embeddings_sha256: Some(sha256_hex_file(&args.embeddings)?),
        model: Some(model),
        point_count: cloud.len(),
        dim: cloud.dim(),
        cover: params.cover,
        cluster: params.cluster.clone(),
        max_dim: params.max_dim,
        normalize_points: params.normalize_points,
        colormap: "default".into(),
        color_scale: scale.name().into(),
    };
    let graph = colorize(&complex, metadata, &ColorMap::default(), scale);
    save_graph_file(&graph, &args.out)?;
    if cli.verbose {
        eprintln!("graph written to {}", args.out.display());
    }
    say(format!(
        "nodes {} edges {}",
        graph.nodes.len(),
        graph.edges.len()
    ));
    Ok(())
}

pub fn analyze(_cli: &Cli, args: &AnalyzeArgs) -> Result<()> {
    let graph = load_graph_file(&args.graph)?;
    let records = load_corpus(&args.corpus)?;
    let labels = corpus_labels(&records);
    let complex = to_complex(&graph);
    let report = separation_report(&complex, &labels);

    say(format!(
        "graph: {} nodes, {} edges",
        complex.vertex_count(),
        complex.edge_count()
    ));
    say(format!("betti0: {}", report.betti0));
    say(format!("betti1: {}", report.betti1));
    say(format!("components: {}", report.component_count));
    for (i, comp) in report.components.iter().enumerate() {
        let purity = match report.per_component_purity[i] {
            Some(p) => format!("{p:.6}"),
            None => "undefined".into(),
        };
        let majority = match report.component_majority[i] {
            Some(1) => "+1",
            Some(-1) => "-1",
            _ => "none",
        };
        let nodes: Vec<String> = comp.iter().map(usize::to_string).collect();
        say(format!(
            "component {i}: nodes=[{}] majority={majority} purity={purity}",
            nodes.join(",")
        ));
    }
    say(format!("cross_edges: {}", report.cross_edges));
    let shared: Vec<String> = report.shared_nodes.iter().map(usize::to_string).collect();
    say(format!("shared_nodes: [{}]", shared.join(",")));

    let any_labeled = report.per_component_purity.iter().any(Option::is_some);
    if !any_labeled && !report.components.is_empty() {
        return Err(Error::EmptyInput(
            "no labels found for any graph member; purity is undefined".into(),
        ));
    }
    Ok(())
}

pub fn render(_cli: &Cli, args: &RenderArgs) -> Result<()> {
    let mut graph = load_graph_file(&args.graph)?;
    let scale = match args.colormap {
        crate::ColormapArg::Default => ColorScale::Observed,
        crate::ColormapArg::Pinned => ColorScale::Pinned { lo: -1.0, hi: 1.0 },
    };
    recolor(&mut graph, &ColorMap::default(), scale);
    let body = match args.format {
        RenderFormat::Dot => to_dot(&graph),
        RenderFormat::Html => to_html_report(&graph),
    };
    write_text(&args.out, &body)?;
    say(format!("wrote {}", args.out.display()));
    Ok(())
}

pub fn gen_fixture(cli: &Cli, args: &GenFixtureArgs) -> Result<()> {
    match args.kind {
        FixtureKind::Circle => {
            let n = args.points.unwrap_or(1000);
            let cloud = circle_cloud(n, args.noise, cli.seed)?;
            save_embeddings(&cloud, "synthetic-circle", &args.out, args.format.into())?;
            if let Some(corpus_out) = &args.corpus_out {
                let records: Vec<CorpusRecord> = cloud
                    .ids()
                    .map(|id| CorpusRecord {
                        id: id.to_string(),
                        text: format!("synthetic point {id}"),
                        label: None,
                    })
                    .collect();
                save_corpus(&records, corpus_out)?;
            }
            if let Some(direction_out) = &args.direction_out {
                // The natural lens axis for the circle: the first coordinate.
                let axis = Vector::new(vec![1.0, 0.0])?;
                let fd = FairnessDirection {
                    direction: axis,
                    provenance: vec![],
                    raw_norm: 1.0,
                };
                DirectionFile::new(&fd, "synthetic-circle", false).save(direction_out)?;
            }
            say(format!(
                "circle fixture: {} points, dim 2, seed {}",
                n, cli.seed
            ));
        }
        FixtureKind::TwoBlob => {
            let per_blob = args.points.unwrap_or(200);
            let blob = two_blob_cloud(per_blob, args.dim, args.separation, cli.seed)?;
            save_embeddings(
                &blob.cloud,
                "synthetic-two-blob",
                &args.out,
                args.format.into(),
            )?;
            if let Some(corpus_out) = &args.corpus_out {
                let records: Vec<CorpusRecord> = blob
                    .cloud
                    .ids()
                    .map(|id| CorpusRecord {
                        id: id.to_string(),
                        text: format!("synthetic point {id}"),
                        label: blob.labels.get(id).copied(),
                    })
                    .collect();
                save_corpus(&records, corpus_out)?;
            }
            if let Some(direction_out) = &args.direction_out {
                let fd = FairnessDirection {
                    direction: blob.axis.clone(),
                    provenance: vec![],
                    raw_norm: blob.axis.norm(),
                };
                DirectionFile::new(&fd, "synthetic-two-blob", false).save(direction_out)?;
            }
            say(format!(
                "two-blob fixture: {} points, dim {}, separation {}, seed {}",
                2 * per_blob,
                args.dim,
                args.separation,
                cli.seed
            ));
        }
    }
    Ok(())
}

pub fn concepts(_cli: &Cli, args: &ConceptsArgs) -> Result<()> {
    let table = if args.corrected {
        corrected_concept_table()
    } else {
        default_concept_table()
    };
    if args.as_corpus {
        let records: Vec<CorpusRecord> = table
            .iter()
            .flat_map(|p| [p.positive_text.clone(), p.negative_text.clone()])
            .map(|text| CorpusRecord {
                id: text.clone(),
                text,
                label: None,
            })
            .collect();
        match &args.out {
            Some(path) => save_corpus(&records, path)?,
            None => {
                for r in &records {
                    say(format!("{}\t{}", r.id, r.text));
                }
            }
        }
    } else {
        match &args.out {
            Some(path) => save_concept_table(&table, path)?,
            None => {
                let tsv = fairmap_core::fairness::concept_table_to_tsv(&table);
                say(tsv.trim_end_matches('\n'));
            }
        }
    }
    Ok(())
}
