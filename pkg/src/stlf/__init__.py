"""Short-term load forecasting with walk-forward EWT features and ensemble deep RVFL networks."""

__version__ = "0.1.0"

from .edrvfl import (  # noqa: F401
    EdRvflConfig, EdRvflModel, ForecastSet, fit, forward_features, init_model,
    persistence_forecast, predict, shallow_rvfl_fit_predict,
)
from .errors import (  # noqa: F401
    ArtifactError, ConfigError, DataError, NumericalError, ShapeError, SizingError,
    StateError, StlfError,
)
from .evalstat import (  # noqa: F401
    friedman_test, mape, mase, nemenyi_cd, nemenyi_pairwise, rank_models, rmse,
)
from .ewt import (  # noqa: F401
    beta, build_filter_bank, decompose, detect_boundaries, reconstruct,
)
from .ridge import ridge_solve  # noqa: F401
from .series import (  # noqa: F401
    FeatureMatrix, NormalizationParams, SplitSpec, TimeSeries, build_lag_matrix,
    denormalize, describe, normalize, split,
)
from .tuning import SearchSpace, grid_eval, layerwise_tune  # noqa: F401
from .walkforward import (  # noqa: F401
    WalkForwardConfig, walk_forward_features, walk_forward_features_at,
)
