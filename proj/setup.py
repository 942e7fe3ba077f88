# SPDX-License-Identifier: Apache-2.0
# setuptools shim that delegates the extension build to CMake

import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        # directory that must end up holding swarminfer/_core*.so
        pkg_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve()
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DSWARMINFER_TESTS=OFF",
                f"-DPython3_EXECUTABLE={sys.executable}",
                f"-DSWARMINFER_PKG_DIR={pkg_dir}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "swarminfer_ext", "-j"],
            check=True,
        )


setup(
    ext_modules=[CMakeExtension("swarminfer._core")],
    cmdclass={"build_ext": CMakeBuild},
)
