use std::collections::HashMap;

use super::Pose2D;
use crate::error::GeometryError;

/// Named coordinate frames connected by parent→child rigid transforms.
///
/// Each edge stores the child's pose expressed in its parent. The structure is a
/// tree rooted at a single global frame.
#[derive(Debug, Clone)]
pub struct FrameTree {
    root: String,
    parents: HashMap<String, (String, Pose2D)>,
}

impl FrameTree {
    pub fn new(root: impl Into<String>) -> Self {
        Self {
            root: root.into(),
            parents: HashMap::new(),
        }
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn contains(&self, name: &str) -> bool {
        name == self.root || self.parents.contains_key(name)
    }

    pub fn frames(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.root.as_str()).chain(self.parents.keys().map(String::as_str))
    }

    /// Attaches `child` under `parent`. Re-attaching an existing frame is rejected so the
    /// structure cannot grow a cycle.
    pub fn add_frame(
        &mut self,
        child: &str,
        parent: &str,
        pose: Pose2D,
    ) -> Result<(), GeometryError> {
        if self.contains(child) {
            return Err(GeometryError::DuplicateFrame(child.to_string()));
        }
        if !self.contains(parent) {
            return Err(GeometryError::FrameNotFound(parent.to_string()));
        }
        self.parents
            .insert(child.to_string(), (parent.to_string(), pose));
        Ok(())
    }

    /// Replaces the transform on the edge into `child`.
    pub fn set_transform(&mut self, child: &str, pose: Pose2D) -> Result<(), GeometryError> {
        match self.parents.get_mut(child) {
            Some(edge) => {
                edge.1 = pose;
                Ok(())
            }
            None if child == self.root => Err(GeometryError::RootHasNoParent),
            None => Err(GeometryError::FrameNotFound(child.to_string())),
        }
    }

    /// Pose of `frame` in the root frame.
    fn to_root(&self, frame: &str) -> Result<Pose2D, GeometryError> {
        let mut chain = Vec::new();
        let mut cur = frame;
        while cur != self.root {
            let (parent, pose) = self
                .parents
                .get(cur)
                .ok_or_else(|| GeometryError::FrameNotFound(cur.to_string()))?;
            chain.push(*pose);
            cur = parent;
        }
        Ok(chain
            .iter()
            .rev()
            .fold(Pose2D::IDENTITY, |acc, p| acc.compose(p)))
    }

    /// Transform mapping coordinates in `from` into coordinates in `to`.
    pub fn frame_transform(&self, from: &str, to: &str) -> Result<Pose2D, GeometryError> {
        let root_from = self.to_root(from)?;
        let root_to = self.to_root(to)?;
        Ok(root_to.inverse().compose(&root_from))
    }
}
