"""
Dependency injection container built on Dishka.
Registers configuration, raster storage and the registration service.
"""

from typing import Optional

from dishka import Container, Provider, Scope, make_container, provide

from src.application.services.registration_service import RegistrationService
from src.domain.ports.inbound.services.registration_service_port import RegistrationServicePort
from src.domain.ports.outbound.repositories.raster_repository import RasterRepository
from src.infrastructure.adapters.outbound.raster.file_raster_repository import FileRasterRepositoryAdapter
from src.infrastructure.config.settings import RasterSettings, Settings, settings


class ConfigProvider(Provider):
    """
    Provider of configuration settings.
    Serves the environment settings unless an explicit instance is given.
    """

    scope = Scope.APP

    def __init__(self, app_settings: Optional[Settings] = None) -> None:
        super().__init__()
        self._settings = app_settings or settings

    @provide
    def provide_settings(self) -> Settings:
        return self._settings

    @provide
    def provide_raster_settings(self, app_settings: Settings) -> RasterSettings:
        return app_settings.raster


class StorageProvider(Provider):
    """
    Provider of raster persistence.
    Raster files are opened lazily, so one repository serves the whole run.
    """

    scope = Scope.APP

    @provide
    def provide_raster_repository(self, raster_settings: RasterSettings) -> RasterRepository:
        return FileRasterRepositoryAdapter(raster_settings)


class ServiceProvider(Provider):
    """Provider of the application service driving the pipeline stages."""

    scope = Scope.APP

    @provide
    def provide_registration_service(self, repository: RasterRepository) -> RegistrationServicePort:
        return RegistrationService(repository)


def create_dishka_container(app_settings: Optional[Settings] = None) -> Container:
    """
    Create the Dishka DI container.

    Provider order:
    1. Configuration
    2. Raster storage
    3. Application services
    """
    return make_container(
        ConfigProvider(app_settings),
        StorageProvider(),
        ServiceProvider(),
    )
