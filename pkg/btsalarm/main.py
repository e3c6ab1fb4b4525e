"""
BTS room alarm NMC - status API
Read-only HTTP view of the site table and alarm log
"""

from fastapi import FastAPI

from btsalarm.api.routes import get_nmc_service, router

app = FastAPI(
    title="BTS Alarm NMC Status API",
    description="Site table and alarm log of the NMC aggregation service",
    version="0.1.0"
)


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    service = get_nmc_service()
    return {
        "status": "healthy",
        "service": "bts-alarm-nmc",
        "sites": len(service.table.sites),
        "frames_accepted": service.frames_accepted,
    }


app.include_router(router, prefix="/api")
