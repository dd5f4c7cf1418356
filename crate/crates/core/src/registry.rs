//! Name-keyed constructors for every interchangeable strategy.
//!
//! ```
//! use fmrl_core::registry::Registry;
//!
//! let reg = Registry::builtin();
//! let variant = reg.variant("fal").unwrap();
//! assert_eq!(variant.name(), "fal");
//! assert!(reg.variant("nope").is_err());
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::analysis::{Directional, QgEstimator, Relaxed};
use crate::error::{Error, Result};
use crate::fmrl::{Fal, FliBatch, FliOnline, SingleTask, Strawman, Variant};
use crate::geometry::{BregmanGeometry, ConvexSet};
use crate::meta::{Aogd, Ftl, MetaLearner};
use crate::point::Point;
use crate::within_task::{Ftrl, Omd, WithinTaskLearner};

pub type GeometryCtor = Box<dyn Fn() -> BregmanGeometry + Send + Sync>;
pub type LearnerCtor = Box<dyn Fn() -> Arc<dyn WithinTaskLearner> + Send + Sync>;
pub type MetaCtor =
    Box<dyn Fn(Point, &BregmanGeometry, &ConvexSet) -> Result<Box<dyn MetaLearner>> + Send + Sync>;
pub type VariantCtor = Box<dyn Fn() -> Arc<dyn Variant> + Send + Sync>;
/// Takes a seed for estimators that sample.
pub type QgCtor = Box<dyn Fn(u64) -> Arc<dyn QgEstimator> + Send + Sync>;

pub struct Registry {
    geometries: BTreeMap<String, GeometryCtor>,
    learners: BTreeMap<String, LearnerCtor>,
    metas: BTreeMap<String, MetaCtor>,
    variants: BTreeMap<String, VariantCtor>,
    qg: BTreeMap<String, QgCtor>,
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &'static str, name: &str) -> Result<&'a T> {
    map.get(name).ok_or_else(|| Error::UnknownStrategy {
        kind,
        name: name.to_string(),
        known: map.keys().cloned().collect::<Vec<_>>().join(", "),
    })
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            geometries: BTreeMap::new(),
            learners: BTreeMap::new(),
            metas: BTreeMap::new(),
            variants: BTreeMap::new(),
            qg: BTreeMap::new(),
        }
    }

    /// All strategies shipped with the crate.
    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        r.register_geometry("euclidean", Box::new(BregmanGeometry::euclidean));
        r.register_geometry("entropic", Box::new(BregmanGeometry::entropic));

        r.register_learner("ftrl", Box::new(|| Arc::new(Ftrl)));
        r.register_learner("omd", Box::new(|| Arc::new(Omd)));

        r.register_meta("ftl", Box::new(|phi, _, _| Ok(Box::new(Ftl::new(phi)))));
        r.register_meta(
            "aogd",
            Box::new(|phi, geometry, set| Ok(Box::new(Aogd::new(phi, geometry, set)?))),
        );

        r.register_variant("fal", Box::new(|| Arc::new(Fal)));
        r.register_variant("fli-online", Box::new(|| Arc::new(FliOnline)));
        r.register_variant("fli-batch", Box::new(|| Arc::new(FliBatch)));
        r.register_variant("strawman", Box::new(|| Arc::new(Strawman)));
        r.register_variant("single-task", Box::new(|| Arc::new(SingleTask)));

        r.register_qg("relaxed", Box::new(|_| Arc::new(Relaxed)));
        r.register_qg(
            "directional",
            Box::new(|seed| {
                Arc::new(Directional {
                    seed,
                    ..Directional::default()
                })
            }),
        );
        r
    }

    pub fn register_geometry(&mut self, name: &str, ctor: GeometryCtor) {
        self.geometries.insert(name.to_string(), ctor);
    }

    pub fn register_learner(&mut self, name: &str, ctor: LearnerCtor) {
        self.learners.insert(name.to_string(), ctor);
    }

    pub fn register_meta(&mut self, name: &str, ctor: MetaCtor) {
        self.metas.insert(name.to_string(), ctor);
    }

    pub fn register_variant(&mut self, name: &str, ctor: VariantCtor) {
        self.variants.insert(name.to_string(), ctor);
    }

    pub fn register_qg(&mut self, name: &str, ctor: QgCtor) {
        self.qg.insert(name.to_string(), ctor);
    }

    pub fn geometry(&self, name: &str) -> Result<BregmanGeometry> {
        Ok(lookup(&self.geometries, "geometry", name)?())
    }

    pub fn learner(&self, name: &str) -> Result<Arc<dyn WithinTaskLearner>> {
        Ok(lookup(&self.learners, "within-task learner", name)?())
    }

    pub fn meta(&self, name: &str, phi1: Point, geometry: &BregmanGeometry, set: &ConvexSet) -> Result<Box<dyn MetaLearner>> {
        lookup(&self.metas, "meta-learner", name)?(phi1, geometry, set)
    }

    pub fn variant(&self, name: &str) -> Result<Arc<dyn Variant>> {
        Ok(lookup(&self.variants, "variant", name)?())
    }

    pub fn qg(&self, name: &str, seed: u64) -> Result<Arc<dyn QgEstimator>> {
        Ok(lookup(&self.qg, "quadratic-growth estimator", name)?(seed))
    }

    pub fn geometry_names(&self) -> Vec<&str> {
        self.geometries.keys().map(String::as_str).collect()
    }

    pub fn learner_names(&self) -> Vec<&str> {
        self.learners.keys().map(String::as_str).collect()
    }

    pub fn meta_names(&self) -> Vec<&str> {
        self.metas.keys().map(String::as_str).collect()
    }

    pub fn variant_names(&self) -> Vec<&str> {
        self.variants.keys().map(String::as_str).collect()
    }

    pub fn qg_names(&self) -> Vec<&str> {
        self.qg.keys().map(String::as_str).collect()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry")
            .field("geometries", &self.geometry_names())
            .field("learners", &self.learner_names())
            .field("metas", &self.meta_names())
            .field("variants", &self.variant_names())
            .field("qg", &self.qg_names())
            .finish()
    }
}
