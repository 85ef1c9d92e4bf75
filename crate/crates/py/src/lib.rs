//! Python bindings: images, Bezier strokes, blots, CTC boundaries, StackMix
//! synthesis and recognition metrics.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use scribeforge::bezier::{self, ControlPolygon, Point2};
use scribeforge::blot::{self, BlotConfig};
use scribeforge::ctc::{self, Alphabet, PosteriorMatrix, SymbolSpan};
use scribeforge::metrics::{self, EvalOptions, EvalPair};
use scribeforge::stackmix::{self, CorpusLine, FileImageStore, FragmentIndex, TokenizerBank};

fn py_err(e: scribeforge::Error) -> PyErr {
    match e {
        scribeforge::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for scribeforge::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Grayscale line image, 0 = ink, 255 = background.
#[pyclass(name = "RasterImage", module = "scribeforge", eq, frozen)]
#[derive(PartialEq)]
struct PyRasterImage(scribeforge::RasterImage);

#[pymethods]
impl PyRasterImage {
    #[new]
    #[pyo3(signature = (width, height, fill = 255))]
    fn new(width: u32, height: u32, fill: u8) -> PyResult<Self> {
        scribeforge::RasterImage::new_blank(width, height, fill).py().map(Self)
    }

    /// Build from row-major bytes.
    #[staticmethod]
    fn from_bytes(width: u32, height: u32, pixels: Vec<u8>) -> PyResult<Self> {
        scribeforge::RasterImage::from_pixels(width, height, pixels).py().map(Self)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        scribeforge::RasterImage::load(path).py().map(Self)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(path).py()
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.height()
    }

    /// Row-major pixel bytes.
    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.0.pixels())
    }

    fn get(&self, x: u32, y: u32) -> Option<u8> {
        self.0.get(x, y)
    }

    fn resize_to_height(&self, height: u32) -> PyResult<Self> {
        self.0.resize_to_height(height).py().map(Self)
    }

    /// `(x, y, w, h)` of pixels darker than the ink threshold, or None.
    fn ink_bbox(&self) -> Option<(u32, u32, u32, u32)> {
        self.0.ink_bbox().map(|r| (r.x, r.y, r.w, r.h))
    }

    fn digest(&self) -> String {
        self.0.digest()
    }

    fn __repr__(&self) -> String {
        format!("RasterImage({}x{})", self.0.width(), self.0.height())
    }
}

/// Seeded random stream shared by all stochastic operations.
#[pyclass(name = "Rng", module = "scribeforge")]
struct PyRng(scribeforge::RngState);

#[pymethods]
impl PyRng {
    #[new]
    fn new(seed: u64) -> Self {
        Self(scribeforge::RngState::from_seed(seed))
    }

    /// Stream for item `index` of a batch run with `seed`.
    #[staticmethod]
    fn derive(seed: u64, index: u64) -> Self {
        Self(scribeforge::RngState::derive(seed, index))
    }

    fn random(&mut self) -> f64 {
        self.0.uniform_real(0.0, 1.0)
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        self.0.bernoulli(p)
    }

    /// Uniform integer in `[lo, hi]`.
    fn randint(&mut self, lo: i64, hi: i64) -> i64 {
        self.0.uniform_int(lo, hi)
    }
}

#[pyfunction]
fn bernstein(j: usize, n: usize, s: f64) -> PyResult<f64> {
    bezier::bernstein(j, n, s).py()
}

fn polygon(points: Vec<(f64, f64)>) -> PyResult<ControlPolygon> {
    ControlPolygon::new(points.into_iter().map(|(x, y)| Point2::new(x, y)).collect()).py()
}

#[pyfunction]
fn bezier_point(points: Vec<(f64, f64)>, s: f64) -> PyResult<(f64, f64)> {
    let p = bezier::bezier_point(&polygon(points)?, s).py()?;
    Ok((p.x, p.y))
}

#[pyfunction]
fn sample_curve(points: Vec<(f64, f64)>, samples: usize) -> PyResult<Vec<(f64, f64)>> {
    let path = bezier::sample_curve(&polygon(points)?, samples).py()?;
    Ok(path.into_iter().map(|p| (p.x, p.y)).collect())
}

#[pyfunction]
#[pyo3(signature = (image, path, thickness, opacity = 1.0, ink = 0))]
fn rasterize_stroke(
    image: &PyRasterImage,
    path: Vec<(f64, f64)>,
    thickness: f64,
    opacity: f64,
    ink: u8,
) -> PyResult<PyRasterImage> {
    let path: Vec<Point2> = path.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
    bezier::rasterize_stroke(&image.0, &path, thickness, opacity, ink)
        .py()
        .map(PyRasterImage)
}

/// Character spans of one line, tiling its width.
#[pyclass(name = "BoundarySet", module = "scribeforge", frozen)]
struct PyBoundarySet(ctc::BoundarySet);

#[pymethods]
impl PyBoundarySet {
    #[new]
    fn new(line_id: String, width: u32, spans: Vec<(char, u32, u32)>) -> PyResult<Self> {
        let spans = spans
            .into_iter()
            .map(|(ch, start_px, end_px)| SymbolSpan { ch, start_px, end_px })
            .collect();
        ctc::BoundarySet::new(line_id, width, spans).py().map(Self)
    }

    #[getter]
    fn line_id(&self) -> &str {
        self.0.line_id()
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width()
    }

    #[getter]
    fn spans(&self) -> Vec<(char, u32, u32)> {
        self.0.spans().iter().map(|s| (s.ch, s.start_px, s.end_px)).collect()
    }

    fn text(&self) -> String {
        self.0.text()
    }

    fn tiles_width(&self) -> bool {
        self.0.tiles_width()
    }
}

fn blot_config(overrides: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<BlotConfig> {
    let mut config = BlotConfig::default();
    let Some(d) = overrides else { return Ok(config) };
    for (key, value) in d.iter() {
        let key: String = key.extract()?;
        match key.as_str() {
            "min_h" => config.min_h = value.extract()?,
            "max_h" => config.max_h = value.extract()?,
            "min_w" => config.min_w = value.extract()?,
            "max_w" => config.max_w = value.extract()?,
            "incline" => config.incline = value.extract()?,
            "intensity" => config.intensity = value.extract()?,
            "transparency" => config.transparency = value.extract()?,
            "count_min" => config.count_min = value.extract()?,
            "count_max" => config.count_max = value.extract()?,
            "proba" => config.proba = value.extract()?,
            "thickness" => config.thickness = value.extract()?,
            other => return Err(PyValueError::new_err(format!("unknown blot option {other:?}"))),
        }
    }
    config.validate().py()?;
    Ok(config)
}

/// Strike through parts of `image`; options override the default blot settings.
#[pyfunction]
#[pyo3(signature = (image, rng, boundaries = None, **options))]
fn apply_handwritten_blots(
    image: &PyRasterImage,
    rng: &mut PyRng,
    boundaries: Option<&PyBoundarySet>,
    options: Option<&Bound<'_, pyo3::types::PyDict>>,
) -> PyResult<PyRasterImage> {
    let config = blot_config(options)?;
    blot::apply_handwritten_blots(&image.0, &config, &mut rng.0, boundaries.map(|b| &b.0))
        .py()
        .map(PyRasterImage)
}

fn posteriors(rows: Vec<Vec<f32>>) -> PyResult<PosteriorMatrix> {
    PosteriorMatrix::from_rows(&rows).py()
}

/// Best CTC path: `(states, log_score)`; odd state `2i + 1` is character `i`.
#[pyfunction]
fn forced_align(rows: Vec<Vec<f32>>, transcript: &str, alphabet: &str) -> PyResult<(Vec<usize>, f64)> {
    let alphabet = Alphabet::from_str(alphabet).py()?;
    let a = ctc::forced_align(&posteriors(rows)?, transcript, &alphabet).py()?;
    Ok((a.states, a.log_score))
}

#[pyfunction]
fn extract_boundaries(
    rows: Vec<Vec<f32>>,
    transcript: &str,
    alphabet: &str,
    width: u32,
    line_id: &str,
) -> PyResult<PyBoundarySet> {
    let alphabet = Alphabet::from_str(alphabet).py()?;
    ctc::extract_boundaries(&posteriors(rows)?, transcript, &alphabet, width, line_id)
        .py()
        .map(PyBoundarySet)
}

/// Read a posterior file: `(rows, alphabet)`.
#[pyfunction]
fn read_posteriors(path: PathBuf) -> PyResult<(Vec<Vec<f32>>, String)> {
    let (post, alphabet) = ctc::read_posteriors(path).py()?;
    let rows = (0..post.frames()).map(|t| post.row(t).to_vec()).collect();
    Ok((rows, alphabet.as_string()))
}

#[pyfunction]
fn write_posteriors(path: PathBuf, rows: Vec<Vec<f32>>, alphabet: &str) -> PyResult<()> {
    let alphabet = Alphabet::from_str(alphabet).py()?;
    let file = std::fs::File::create(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
    ctc::write_posteriors(std::io::BufWriter::new(file), &posteriors(rows)?, &alphabet).py()
}

/// Greedy longest-match tokenization against `expressions`.
#[pyfunction]
fn tokenize(text: &str, expressions: Vec<String>, max_dim: usize) -> PyResult<Vec<String>> {
    let lexicon = stackmix::MweLexicon::new(max_dim, expressions).py()?;
    Ok(stackmix::tokenize(text, &lexicon))
}

/// Lines made only of alphabet characters, and the number dropped.
#[pyfunction]
fn filter_corpus(lines: Vec<String>, alphabet: &str) -> PyResult<(Vec<String>, usize)> {
    let alphabet = Alphabet::from_str(alphabet).py()?;
    let f = stackmix::filter_corpus(&lines, &alphabet);
    Ok((f.kept.iter().map(|l| l.text().to_string()).collect(), f.dropped))
}

/// A fragment index loaded from disk, ready to synthesize lines.
#[pyclass(name = "Synthesizer", module = "scribeforge", frozen)]
struct PySynthesizer {
    index: FragmentIndex,
    bank: TokenizerBank,
    store: FileImageStore,
}

#[pymethods]
impl PySynthesizer {
    /// Load an index file; `probs` weights its lexicons (default: the
    /// standard weights for the default dims, uniform otherwise).
    #[new]
    #[pyo3(signature = (index_path, probs = None))]
    fn new(index_path: PathBuf, probs: Option<Vec<f64>>) -> PyResult<Self> {
        let index = FragmentIndex::load(index_path).py()?;
        let dims: Vec<usize> = index.lexicons().iter().map(|l| l.max_dim()).collect();
        let bank = match probs {
            Some(p) => index.bank(p).py()?,
            None if dims.is_empty() => TokenizerBank::per_character(index.atoms().clone()),
            None if dims == stackmix::DEFAULT_DIMS => index.bank(stackmix::DEFAULT_PROBS.to_vec()).py()?,
            None => index.bank(vec![1.0 / dims.len() as f64; dims.len()]).py()?,
        };
        let store = FileImageStore::for_index(&index);
        Ok(Self { index, bank, store })
    }

    #[getter]
    fn alphabet(&self) -> String {
        self.index.alphabet().as_string()
    }

    #[getter]
    fn fragment_count(&self) -> usize {
        self.index.fragment_count()
    }

    fn missing_characters(&self, text: &str) -> Vec<char> {
        stackmix::missing_characters(text, &self.index)
    }

    /// Render `text`: `(image, label, provenance)` where provenance lists
    /// `(token, line_id, start_px, end_px)`.
    #[pyo3(signature = (text, rng, target_height = 128))]
    #[allow(clippy::type_complexity)]
    fn synthesize(
        &self,
        text: &str,
        rng: &mut PyRng,
        target_height: u32,
    ) -> PyResult<(PyRasterImage, String, Vec<(String, String, u32, u32)>)> {
        let line = CorpusLine::new(text, self.index.alphabet()).py()?;
        let r = stackmix::synthesize_line(&line, &self.index, &self.bank, &self.store, &mut rng.0, target_height)
            .py()?;
        let provenance = r
            .provenance
            .into_iter()
            .map(|p| (p.token, p.line_id, p.start_px, p.end_px))
            .collect();
        Ok((PyRasterImage(r.image), r.label, provenance))
    }
}

fn pairs(items: Vec<(String, String)>) -> Vec<EvalPair> {
    items.into_iter().map(|(p, t)| EvalPair::new(p, t)).collect()
}

#[pyfunction]
fn levenshtein(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    metrics::levenshtein(&a, &b)
}

/// CER over `(prediction, truth)` pairs, in percent.
#[pyfunction]
fn cer(pairs_: Vec<(String, String)>) -> PyResult<f64> {
    metrics::cer(&pairs(pairs_)).py()
}

#[pyfunction]
fn wer(pairs_: Vec<(String, String)>) -> PyResult<f64> {
    metrics::wer(&pairs(pairs_)).py()
}

#[pyfunction]
fn accuracy(pairs_: Vec<(String, String)>) -> PyResult<f64> {
    metrics::accuracy(&pairs(pairs_)).py()
}

/// `{"cer", "wer", "acc", "n"}` for `(prediction, truth)` pairs.
#[pyfunction]
#[pyo3(signature = (pairs_, lowercase = false))]
fn evaluate(py: Python<'_>, pairs_: Vec<(String, String)>, lowercase: bool) -> PyResult<Py<PyAny>> {
    let r = metrics::evaluate(&pairs(pairs_), EvalOptions { lowercase }).py()?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("cer", r.cer)?;
    d.set_item("wer", r.wer)?;
    d.set_item("acc", r.acc)?;
    d.set_item("n", r.n)?;
    Ok(d.into_any().unbind())
}

#[pymodule]
fn _scribeforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRasterImage>()?;
    m.add_class::<PyRng>()?;
    m.add_class::<PyBoundarySet>()?;
    m.add_class::<PySynthesizer>()?;
    m.add_function(wrap_pyfunction!(bernstein, m)?)?;
    m.add_function(wrap_pyfunction!(bezier_point, m)?)?;
    m.add_function(wrap_pyfunction!(sample_curve, m)?)?;
    m.add_function(wrap_pyfunction!(rasterize_stroke, m)?)?;
    m.add_function(wrap_pyfunction!(apply_handwritten_blots, m)?)?;
    m.add_function(wrap_pyfunction!(forced_align, m)?)?;
    m.add_function(wrap_pyfunction!(extract_boundaries, m)?)?;
    m.add_function(wrap_pyfunction!(read_posteriors, m)?)?;
    m.add_function(wrap_pyfunction!(write_posteriors, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(filter_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(levenshtein, m)?)?;
    m.add_function(wrap_pyfunction!(cer, m)?)?;
    m.add_function(wrap_pyfunction!(wer, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
