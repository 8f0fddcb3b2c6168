//! Slicing corpus images into input/real fragment pairs and assembling
//! mixed-format candidate pools.

mod dataset;
mod error;
mod pool;
mod slice;

pub use dataset::{
    build_dataset, build_dataset_from, load_corpus, load_dataset, normalize_image, read_manifest,
    CorpusImage, DatasetManifest, ImageProfile, ManifestRecord, PrngInfo, RatioSet, MANIFEST_FILE,
    MANIFEST_VERSION,
};
pub use error::FragmentError;
pub use pool::{
    build_pool, DecoySource, FormatMix, FragmentPool, PoolEntry, SourceFormat, DEFAULT_POOL_SIZE,
};
pub use slice::{slice_fragment, FragmentRecord, Ratio};
