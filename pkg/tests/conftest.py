import pytest

from slsbench.packaging import WorkloadManifest, build_package


@pytest.fixture
def synthetic_artifact(tmp_path):
    tree = tmp_path / "workload"
    tree.mkdir()
    manifest = WorkloadManifest(id="synthetic", language_name="python", handler="builtin:synthetic")
    return build_package(tree, manifest, out_dir=tmp_path / "packages")
