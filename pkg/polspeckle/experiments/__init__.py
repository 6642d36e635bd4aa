from polspeckle.experiments.montecarlo import (
    CampaignReport,
    CampaignSpec,
    CellStats,
    run_campaign,
    variance_statistics,
)
