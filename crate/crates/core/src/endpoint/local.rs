use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::{check_object_name, Endpoint, EndpointError, Lane};

/// Objects kept as flat files named by object name under `root`.
#[derive(Debug)]
pub struct LocalDirEndpoint {
    id: String,
    root: PathBuf,
}

impl LocalDirEndpoint {
    pub fn new(id: impl Into<String>, root: impl Into<PathBuf>) -> Result<Self, EndpointError> {
        let id = id.into();
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| EndpointError::io(&id, "", &e))?;
        Ok(LocalDirEndpoint { id, root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn object_path(&self, object: &str) -> Result<PathBuf, EndpointError> {
        check_object_name(&self.id, object)?;
        Ok(self.root.join(object))
    }

    pub(crate) fn write_atomic(&self, object: &str, data: &[u8]) -> Result<u64, EndpointError> {
        let path = self.object_path(object)?;
        let tmp = self.root.join(format!(".{object}.partial"));
        let result = fs::write(&tmp, data).and_then(|()| fs::rename(&tmp, &path));
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            return Err(EndpointError::io(&self.id, object, &e));
        }
        Ok(data.len() as u64)
    }

    pub(crate) fn read(&self, object: &str) -> Result<Vec<u8>, EndpointError> {
        let path = self.object_path(object)?;
        fs::read(&path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => EndpointError::NotFound {
                endpoint: self.id.clone(),
                object: object.to_string(),
            },
            _ => EndpointError::io(&self.id, object, &e),
        })
    }

    pub(crate) fn size_of(&self, object: &str) -> Result<Option<u64>, EndpointError> {
        let path = self.object_path(object)?;
        match fs::metadata(&path) {
            Ok(meta) => Ok(Some(meta.len())),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(EndpointError::io(&self.id, object, &e)),
        }
    }
}

impl Endpoint for LocalDirEndpoint {
    fn id(&self) -> &str {
        &self.id
    }

    fn store(&self, _lane: &mut Lane, object: &str, data: &[u8]) -> Result<u64, EndpointError> {
        self.write_atomic(object, data)
    }

    fn fetch(&self, _lane: &mut Lane, object: &str) -> Result<Vec<u8>, EndpointError> {
        self.read(object)
    }

    fn delete(&self, object: &str) -> Result<(), EndpointError> {
        let path = self.object_path(object)?;
        fs::remove_file(&path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => EndpointError::NotFound {
                endpoint: self.id.clone(),
                object: object.to_string(),
            },
            _ => EndpointError::io(&self.id, object, &e),
        })
    }

    fn exists(&self, object: &str) -> Result<bool, EndpointError> {
        Ok(self.size_of(object)?.is_some())
    }

    fn objects(&self) -> Result<Vec<String>, EndpointError> {
        let mut names = Vec::new();
        let dir = fs::read_dir(&self.root).map_err(|e| EndpointError::io(&self.id, "", &e))?;
        for entry in dir {
            let entry = entry.map_err(|e| EndpointError::io(&self.id, "", &e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if !name.starts_with('.') && entry.path().is_file() {
                names.push(name);
            }
        }
        names.sort();
        Ok(names)
    }
}
