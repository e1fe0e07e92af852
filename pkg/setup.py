from setuptools import setup

if __name__ == "__main__":
    setup(
        # setuptools_scm
        use_scm_version=True,
        setup_requires=["setuptools_scm"],
        # package metadata
        name="hecke-nullity",
        packages=["hecke_nullity"],
        python_requires=">=3.8",
        install_requires=[
            "click",
            "pytest",
            "coverage",
            "sympy",
            "pandas",
            "fsspec",
            "tqdm",
            "SQLAlchemy",
        ],
        entry_points={
            "console_scripts": ["hecke-nullity=hecke_nullity.__main__:main"],
        },
    )
