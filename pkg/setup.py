from setuptools import setup
from LFIC_sim.version import __version__

with open("README.md", 'r', encoding='utf8') as file:
    long_description = file.read()

setup(name='LFIC_sim',
      version=__version__,
      description="Local friendliness under incomplete information: polytopes, quantum bounds and protocol simulation",
      long_description=long_description,
      long_description_content_type='text/markdown',
      author="LFIC_sim developers",
      packages=['LFIC_sim', 'LFIC_sim.config', 'LFIC_sim.utils', 'LFIC_sim.geometry', 'LFIC_sim.npa',
                'LFIC_sim.data', 'tests'],
      package_data={'LFIC_sim.data': ['presets/*.csv']},
      install_requires=['numpy', 'pandas', 'matplotlib', 'scipy', 'pytest'],
      include_package_data=True,
      entry_points={'console_scripts': ['LFIC_sim = LFIC_sim.cli:main']}
      )
