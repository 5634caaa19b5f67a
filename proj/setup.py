from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "rtlab._rtlab",
    sources=[
        "src/python/bindings.cpp",
        "src/track.cpp",
        "src/planner.cpp",
        "src/dataset.cpp",
        "src/models.cpp",
        "src/trainers.cpp",
        "src/agents.cpp",
        "src/eval.cpp",
        "src/render.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
