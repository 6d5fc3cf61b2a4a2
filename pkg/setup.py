from setuptools import setup

setup(
    name="gfcalc",
    version="0.0.1",
    author="gfcalc developers",
    description="General fractional calculus: Sonine and Luchko kernel pairs, "
                "general fractional integrals and derivatives, fundamental-theorem checks",
    keywords='fractional calculus sonine kernel convolution quadrature',
    packages=['gfcalc'],
    python_requires=">=3.8",
    install_requires=["numpy>=1.20"],
    extras_require={"test": ["pytest", "hypothesis", "scipy"]},
    entry_points={"console_scripts": ["gfcalc=gfcalc.cli:main"]},
)
